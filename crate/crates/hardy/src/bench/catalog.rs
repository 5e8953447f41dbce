//! The scenario catalog.
//!
//! Every entry reproduces one weighted inequality or best constant on a
//! concrete geometry, with the smallest dimensions the statement allows so
//! that quadrature stays at desk scale. Node counts per scenario were chosen
//! from measured residual-convergence ladders with a safety margin; the
//! doubled-resolution run is part of every identity check.

use std::sync::OnceLock;

use super::report::Anchor;
use super::scenario::{Check, FamilySpec, IdentityCheck, Scenario, SeedMode};
use crate::calculus::ScalarFieldExpr;
use crate::constants::{BesselProblem, BoundaryCondition, RadialLadder, SamplePlan, SturmLiouvilleProblem};
use crate::geometry::{GeometryContext, SingularSet};
use crate::weights::{FrameVector, PoleRegime, WeightProblem};

fn e(src: &str) -> ScalarFieldExpr {
    ScalarFieldExpr::parse(src).expect("catalog expression")
}

fn one() -> ScalarFieldExpr {
    ScalarFieldExpr::constant(1.0)
}

const J01_SQ: f64 = 5.783185962946785;

const NORM3: &str = "norm(x1,x2,x3)";
const SSQ3: &str = "(x1*x1 + x2*x2 + x3*x3)";

fn anchors(list: &[(&str, &str)]) -> Vec<Anchor> {
    list.iter().map(|(r, q)| Anchor::new(r, q)).collect()
}

fn classical_hardy_n3() -> Scenario {
    let ctx = GeometryContext::euclidean(3);
    let f = e(&format!("pow({NORM3}, -0.5)"));
    let prob = WeightProblem::potential(ctx.clone(), one(), f)
        .with_closed_form(e(&format!("0.25 * pow({NORM3}, -2)")))
        .with_target(e(&format!("pow({NORM3}, -2)")), Some(0.25));
    Scenario {
        id: "classical-hardy-n3",
        description: "inverse-square weight on R^3: W = (n-2)^2/(4|x|^2), best constant 1/4",
        anchors: anchors(&[
            ("master-identity-potential", "int V|grad u|^2 = int W u^2 + int V|grad u - (u/f) grad f|^2"),
            ("inverse-square", "int |grad u|^2 >= (n-2)^2/4 int u^2/|x|^2"),
        ]),
        plan: vec![
            Check::Identity(IdentityCheck::new(
                prob.clone(),
                vec![[0.5, 2.0], [0.5, 2.0], [0.5, 2.0]],
                32,
            )),
            Check::WeightMatch {
                prob: prob.clone(),
                sample_box: vec![[-2.0, 2.0], [-2.0, 2.0], [-2.0, 2.0]],
                points: 10_000,
                rel_tol: 1e-9,
            },
            Check::LowerBound {
                prob: prob.clone(),
                plan: SamplePlan {
                    bounds: vec![[-2.0, 2.0], [-2.0, 2.0], [-2.0, 2.0]],
                    count: 4000,
                    seed: 0,
                    ladder: Some(RadialLadder {
                        directions: 6,
                        r_min: 0.05,
                        r_max: 1e3,
                        per_decade: 8,
                    }),
                },
                expect: Some((0.25, 1e-12)),
                constant_ratio_tol: Some(1e-12),
            },
            Check::TrialUpper {
                n: 3,
                v: one(),
                target: e("pow(r, -2)"),
                family: FamilySpec::PowerLogBump { radial_exponent: -0.5, max_log_halfwidth: 13.5 },
                budget: 60,
                expect: None,
                max_allowed: Some(0.275),
            },
        ],
    }
}

fn classical_hardy_weighted() -> Scenario {
    // drift exponent -1: V = |x|, f = |x|^{-1}, W = |x|^{-1}
    let ctx = GeometryContext::euclidean(3);
    let prob = WeightProblem::potential(ctx, e(NORM3), e(&format!("pow({NORM3}, -1)")))
        .with_closed_form(e(&format!("pow({NORM3}, -1)")));
    Scenario {
        id: "classical-hardy-weighted",
        description: "power-weighted inverse-square family: V=|x|^-a with a=-1 on R^3",
        anchors: anchors(&[(
            "inverse-square-weighted",
            "int |grad u|^2/|x|^a >= (n-2-a)^2/4 int u^2/|x|^{a+2}",
        )]),
        plan: vec![
            Check::Identity(IdentityCheck::new(
                prob.clone(),
                vec![[0.5, 2.0], [0.5, 2.0], [0.5, 2.0]],
                32,
            )),
            Check::WeightMatch {
                prob,
                sample_box: vec![[-2.0, 2.0], [-2.0, 2.0], [-2.0, 2.0]],
                points: 10_000,
                rel_tol: 1e-9,
            },
        ],
    }
}

fn radial_hardy() -> Scenario {
    // single radial frame field: the identity for the radial-derivative form
    let ctx = GeometryContext::euclidean_radial(3);
    let prob = WeightProblem::potential(ctx, one(), e(&format!("pow({NORM3}, -0.5)")))
        .with_closed_form(e(&format!("0.25 * pow({NORM3}, -2)")));
    Scenario {
        id: "radial-hardy",
        description: "radial-derivative version: int |d_r u|^2 with the same inverse-square weight",
        anchors: anchors(&[(
            "radial-derivative-identity",
            "int |d_r u|^2 = (n-2)^2/4 int u^2/|x|^2 + int |d_r u + (n-2)u/(2r)|^2",
        )]),
        plan: vec![
            Check::Identity(IdentityCheck::new(
                prob.clone(),
                vec![[0.5, 2.0], [0.5, 2.0], [0.5, 2.0]],
                32,
            )),
            Check::WeightMatch {
                prob,
                sample_box: vec![[0.3, 2.0], [0.3, 2.0], [0.3, 2.0]],
                points: 10_000,
                rel_tol: 1e-9,
            },
        ],
    }
}

fn leray_disc() -> Scenario {
    let ctx = GeometryContext::euclidean(2);
    let norm2 = "norm(x1,x2)";
    let prob = WeightProblem::potential(
        ctx,
        one(),
        e(&format!("pow(abs(log({norm2})), 0.5)")),
    )
    .with_closed_form(e(&format!(
        "0.25 / (pow({norm2}, 2) * pow(log({norm2}), 2))"
    )));
    Scenario {
        id: "leray-disc",
        description: "planar logarithmic weight on the unit disc: W = 1/(4|x|^2 ln^2|x|)",
        anchors: anchors(&[(
            "log-weight-2d",
            "int_{B^2} |grad u|^2 >= 1/4 int u^2/(|x|^2 ln^2|x|)",
        )]),
        plan: vec![
            Check::Identity(IdentityCheck::new(
                prob.clone(),
                vec![[0.12, 0.42], [0.12, 0.42]],
                48,
            )),
            Check::WeightMatch {
                prob,
                sample_box: vec![[0.1, 0.6], [0.1, 0.6]],
                points: 10_000,
                rel_tol: 1e-9,
            },
        ],
    }
}

fn wang_willem() -> Scenario {
    let ctx = GeometryContext::euclidean(3);
    let prob = WeightProblem::potential(
        ctx,
        one(),
        e(&format!("pow({NORM3}, -0.5) * pow(abs(log({NORM3})), 0.5)")),
    )
    .with_closed_form(e(&format!(
        "0.25 * pow({NORM3}, -2) + 0.25 / (pow({NORM3}, 2) * pow(log({NORM3}), 2))"
    )));
    Scenario {
        id: "wang-willem",
        description: "inverse-square plus logarithmic remainder inside the unit ball",
        anchors: anchors(&[(
            "log-weight-general",
            "int |grad u|^2/|x|^a >= (n-2-a)^2/4 int u^2/|x|^{a+2} + 1/4 int u^2/(|x|^{a+2} ln^2|x|)",
        )]),
        plan: vec![
            Check::Identity(IdentityCheck::new(
                prob.clone(),
                vec![[0.12, 0.42], [0.12, 0.42], [0.12, 0.42]],
                32,
            )),
            Check::WeightMatch {
                prob,
                sample_box: vec![[0.1, 0.45], [0.1, 0.45], [0.1, 0.45]],
                points: 10_000,
                rel_tol: 1e-9,
            },
        ],
    }
}

fn cone_bcm() -> Scenario {
    // k = 1, m = 1, n = 3: V = x1 |x|, f = x3 |x|^{-5/2},
    // W = [(n+m+k)^2/4 - m] V/|x|^2 exactly (the linear factor of f sits on
    // the wall opposite to the monomial weight's)
    let ctx = GeometryContext::euclidean(3).with_singular_set(SingularSet::Union(vec![
        SingularSet::Hyperplane { axis: 0, value: 0.0 },
        SingularSet::Hyperplane { axis: 2, value: 0.0 },
    ]));
    let claimed = 25.0 / 4.0 - 1.0;
    let prob = WeightProblem::potential(
        ctx,
        e(&format!("x1 * {NORM3}")),
        e(&format!("x3 * pow({NORM3}, -2.5)")),
    )
    .with_closed_form(e(&format!("{claimed} * x1 / {NORM3}")))
    .with_target(e(&format!("x1 / {NORM3}")), Some(claimed));
    let bx = vec![[0.3, 1.2], [-0.5, 0.5], [0.3, 1.2]];
    Scenario {
        id: "cone-bcm",
        description: "monomial cone weight x1^k |x|^m on {x1>0, xn>0}: constant (n+m+k)^2/4 - m",
        anchors: anchors(&[(
            "cone-monomial-weight",
            "int |grad u|^2 x1^k|x|^m >= [(n+m+k)^2/4 - m] int u^2 x1^k |x|^{m-2}",
        )]),
        plan: vec![
            Check::Identity(IdentityCheck::new(prob.clone(), bx.clone(), 32)),
            Check::WeightMatch {
                prob: prob.clone(),
                sample_box: bx.clone(),
                points: 10_000,
                rel_tol: 1e-9,
            },
            Check::LowerBound {
                prob,
                plan: SamplePlan { bounds: bx, count: 4000, seed: 0, ladder: None },
                expect: Some((claimed, 1e-9)),
                constant_ratio_tol: Some(1e-10),
            },
        ],
    }
}

fn multipolar(regime: PoleRegime) -> Scenario {
    let (id, desc, anchor) = match regime {
        PoleRegime::SelfAndInteraction => (
            "multipolar-lambda",
            "multipolar field with coefficient sum (n-2)^2/4: pole terms plus pairwise interactions",
            ("multipolar-self-interaction",
             "int |grad u|^2 >= sum_i l_i int u^2/r_i^2 + 4/(n-2)^2 sum_{i<j} l_i l_j int |a_i-a_j|^2 u^2/(r_i^2 r_j^2)"),
        ),
        PoleRegime::InteractionOnly => (
            "multipolar-mu",
            "multipolar field with coefficient sum n-2: pure pairwise interaction weight",
            ("multipolar-interaction-only",
             "int |grad u|^2 >= sum_{i<j} m_i m_j int |a_i-a_j|^2 u^2/(r_i^2 r_j^2)"),
        ),
    };
    // fixed two-pole configuration for the identity check
    let poles = vec![vec![0.0, 0.0, 0.0], vec![2.0, 0.0, 0.0]];
    let coeffs = match regime {
        PoleRegime::SelfAndInteraction => vec![0.125, 0.125],
        PoleRegime::InteractionOnly => vec![0.5, 0.5],
    };
    let cfg = crate::weights::PoleConfiguration::new(poles.clone(), coeffs, regime)
        .expect("catalog pole configuration");
    let ctx = GeometryContext::euclidean(3).with_singular_set(SingularSet::Points(poles));
    let prob = WeightProblem::field(
        ctx,
        one(),
        FrameVector::Components(crate::weights::multipolar_field(&cfg)),
    );
    Scenario {
        id,
        description: desc,
        anchors: anchors(&[
            anchor,
            ("master-identity-field", "int V|grad u|^2 = int [div(VF) - V|F|^2] u^2 + int V|grad u + uF|^2"),
        ]),
        plan: vec![
            Check::MultipolarMatch {
                regime,
                pole_counts: vec![2, 3],
                configs_per_count: 5,
                points: 10_000,
                rel_tol: 1e-9,
            },
            Check::Identity(IdentityCheck::new(
                prob,
                vec![[0.4, 1.4], [0.4, 1.4], [0.4, 1.4]],
                28,
            )),
        ],
    }
}

fn bessel_classical() -> Scenario {
    Scenario {
        id: "bessel-classical",
        description: "shooting threshold for (V,W) = (1, r^-2) in dimension 3: c* = 1/4",
        anchors: anchors(&[
            ("bessel-pair-ode", "y'' + ((n-1)/r + V'/V) y' + cW/V y = 0 has a positive solution on (0,1)"),
            ("bessel-pair-constant", "the best constant is the supremum of admissible c"),
        ]),
        plan: vec![Check::Bessel {
            prob: BesselProblem::new(3, e("1"), e("pow(r, -2)"), 0.0),
            bracket: (0.0, 1.0),
            tol: 1e-4,
            expect: (0.25, 1e-4),
        }],
    }
}

fn bessel_disc() -> Scenario {
    let bessel = BesselProblem::new(2, e("1"), e("1"), 0.0);
    let sl = SturmLiouvilleProblem {
        interval: (0.0, 1.0),
        p: e("t"),
        q: e("0"),
        r: e("t"),
        bc: (BoundaryCondition::Natural, BoundaryCondition::Dirichlet),
        mesh: 1024,
    };
    Scenario {
        id: "bessel-disc",
        description: "constant pair (1,1) in dimension 2: threshold is the first disc eigenvalue",
        anchors: anchors(&[(
            "bessel-pair-constant",
            "shooting and the radial eigensolver agree on the first Dirichlet disc eigenvalue",
        )]),
        plan: vec![
            Check::Bessel {
                prob: bessel.clone(),
                bracket: (1.0, 10.0),
                tol: 1e-3,
                expect: (J01_SQ, 5e-3),
            },
            Check::Sturm { prob: sl.clone(), expect: (J01_SQ, 5e-3) },
            Check::CrossMethods { bessel, bracket: (1.0, 10.0), tol: 1e-3, sl, rel_tol: 0.01 },
        ],
    }
}

fn bessel_leray() -> Scenario {
    Scenario {
        id: "bessel-leray",
        description: "logarithmic pair (1, 1/(r^2 ln^2 r)) in dimension 2: threshold 1/4",
        anchors: anchors(&[(
            "log-weight-2d",
            "the logarithmic pair admits the constant 1/4 with positive solution |ln r|^{1/2}",
        )]),
        plan: vec![Check::Bessel {
            prob: BesselProblem::new(2, e("1"), e("1 / (pow(r,2) * pow(log(r),2))"), 0.0),
            bracket: (0.0, 1.0),
            tol: 1e-3,
            expect: (0.25, 1e-3),
        }],
    }
}

fn bbdgv_subcritical() -> Scenario {
    let n = 3.0;
    let mut plan = Vec::new();
    for alpha in [-0.5, 0.0, 1.0, 2.5] {
        let gamma = -(n + 2.0 * alpha - 2.0) / 4.0;
        let claimed = (n + 2.0 * alpha - 2.0) * (n + 2.0 * alpha - 2.0) / 4.0;
        let ctx = GeometryContext::euclidean(3).with_singular_set(SingularSet::Empty);
        let prob = WeightProblem::potential(
            ctx,
            e(&format!("pow(1 + {SSQ3}, {alpha})")),
            e(&format!("pow(1 + {SSQ3}, {gamma})")),
        )
        .with_target(e(&format!("pow(1 + {SSQ3}, {})", alpha - 1.0)), Some(claimed));
        plan.push(Check::LowerBound {
            prob,
            plan: SamplePlan {
                bounds: vec![[-3.0, 3.0], [-3.0, 3.0], [-3.0, 3.0]],
                count: 4000,
                seed: 0,
                ladder: Some(RadialLadder {
                    directions: 4,
                    r_min: 1e-2,
                    r_max: 1e6,
                    per_decade: 6,
                }),
            },
            expect: Some((claimed, 1e-9)),
            constant_ratio_tol: None,
        });
    }
    // identity spot-check for one member of the family (alpha = 1):
    // W = [(n+2a-2)^2/4 + T(r)](1+r^2)^{a-1} with T = (n^2-(2a-2)^2)/(4(1+r^2))
    let ctx = GeometryContext::euclidean(3).with_singular_set(SingularSet::Empty);
    let prob = WeightProblem::potential(
        ctx,
        e(&format!("pow(1 + {SSQ3}, 1)")),
        e(&format!("pow(1 + {SSQ3}, -0.75)")),
    )
    .with_closed_form(e(&format!("2.25 + 2.25 / (1 + {SSQ3})")));
    plan.push(Check::Identity(IdentityCheck::new(
        prob.clone(),
        vec![[-1.0, 1.5], [-1.0, 1.5], [-1.0, 1.5]],
        32,
    )));
    plan.push(Check::WeightMatch {
        prob,
        sample_box: vec![[-3.0, 3.0], [-3.0, 3.0], [-3.0, 3.0]],
        points: 10_000,
        rel_tol: 1e-9,
    });
    Scenario {
        id: "bbdgv-subcritical",
        description: "smooth bump weight (1+|x|^2)^a, a in [(2-n)/2, (n+2)/2]: constant (n+2a-2)^2/4",
        anchors: anchors(&[(
            "smooth-bump-weight-constant-subcritical",
            "best constant (n+2a-2)^2/4 for int (1+r^2)^a |grad u|^2 >= C int (1+r^2)^{a-1} u^2",
        )]),
        plan,
    }
}

fn bbdgv_supercritical() -> Scenario {
    let n = 3.0;
    let mut plan = Vec::new();
    for alpha in [3.0, 5.0] {
        let claimed = 2.0 * (alpha - 1.0) * n;
        let ctx = GeometryContext::euclidean(3).with_singular_set(SingularSet::Empty);
        let prob = WeightProblem::potential(
            ctx,
            e(&format!("pow(1 + {SSQ3}, {alpha})")),
            e(&format!("pow(1 + {SSQ3}, {})", 1.0 - alpha)),
        )
        .with_target(e(&format!("pow(1 + {SSQ3}, {})", alpha - 1.0)), Some(claimed));
        plan.push(Check::LowerBound {
            prob,
            plan: SamplePlan {
                bounds: vec![[-3.0, 3.0], [-3.0, 3.0], [-3.0, 3.0]],
                count: 4000,
                seed: 0,
                ladder: None,
            },
            expect: Some((claimed, 4e-9)),
            constant_ratio_tol: Some(1e-10),
        });
    }
    plan.push(Check::TrialUpper {
        n: 3,
        v: e("pow(1 + r*r, 3)"),
        target: e("pow(1 + r*r, 2)"),
        family: FamilySpec::TruncatedProfile {
            profile: e("pow(1 + r*r, -2)"),
            min_cut: 50.0,
            max_cut: 3e5,
        },
        budget: 40,
        expect: Some((12.0, 1e-3)),
        max_allowed: None,
    });
    Scenario {
        id: "bbdgv-supercritical",
        description: "smooth bump weight above the critical exponent: constant 2(a-1)n, attained profile",
        anchors: anchors(&[(
            "smooth-bump-weight-constant-supercritical",
            "best constant 2(a-1)n for a > (n+2)/2, minimized by (1+r^2)^{1-a}",
        )]),
        plan,
    }
}

fn mazya_identity() -> Scenario {
    let ctx = GeometryContext::half_space(2);
    let rho2 = "(x1*x1 + x2*x2)";
    let field = crate::calculus::VectorFieldExpr::new(vec![
        e(&format!("0.375 * x1 / {rho2}")),
        e(&format!("0.125 / norm(x1,x2) + 0.375 * x2 / {rho2}")),
    ]);
    let prob = WeightProblem::field(ctx, e("x2"), FrameVector::Components(field))
        .with_closed_form(e(&format!(
            "0.125 / norm(x1,x2) + 0.21875 * x2 * (norm(x1,x2) - x2) / pow(norm(x1,x2), 3)"
        )));
    let bx = vec![[-0.8, 0.8], [0.3, 1.1]];
    Scenario {
        id: "mazya-identity",
        description: "half-plane distance weight via a non-gradient field: W = 1/(8 rho) + remainder",
        anchors: anchors(&[
            ("halfspace-distance-weight",
             "int x_n |grad u|^2 >= 1/8 int u^2/rho + 7/32 int x_n(rho - x_n)/rho^3 u^2"),
            ("master-identity-field", "the identity holds for non-gradient fields"),
        ]),
        plan: vec![
            Check::Identity(IdentityCheck::new(prob.clone(), bx.clone(), 48)),
            Check::WeightMatch { prob, sample_box: bx, points: 10_000, rel_tol: 1e-9 },
        ],
    }
}

fn mazya_lambda() -> Scenario {
    Scenario {
        id: "mazya-lambda",
        description: "angular eigenvalue giving the optimal half-plane constant: lambda = 0.1564..",
        anchors: anchors(&[(
            "halfspace-angular-eigenvalue",
            "lambda = inf over unit-L2 g of int_0^pi [g'^2 + g^2/4] sin t dt = 0.1564..",
        )]),
        plan: vec![Check::Sturm {
            prob: SturmLiouvilleProblem {
                interval: (0.0, std::f64::consts::PI),
                p: e("sin(t)"),
                q: e("sin(t) / 4"),
                r: e("1"),
                bc: (BoundaryCondition::Natural, BoundaryCondition::Natural),
                mesh: 1024,
            },
            expect: (0.1564, 1e-3),
        }],
    }
}

fn exp_weight(id: &'static str, alpha: f64) -> Scenario {
    // V = exp(r^2/4), f = |x|^{(2-n)/2} exp(a r^2):
    // W = V [ (n-2)^2/(4r^2) + (n-2-16a)/4 - a(4a+1) r^2 ]
    let n = 3.0;
    let const_term = (n - 2.0 - 16.0 * alpha) / 4.0;
    let quad_term = -alpha * (4.0 * alpha + 1.0);
    let ctx = GeometryContext::euclidean(3);
    let prob = WeightProblem::potential(
        ctx,
        e(&format!("exp({SSQ3} / 4)")),
        e(&format!("pow({NORM3}, -0.5) * exp({alpha} * {SSQ3})")),
    )
    .with_closed_form(e(&format!(
        "exp({SSQ3} / 4) * (0.25 * pow({NORM3}, -2) + {const_term} + {quad_term} * {SSQ3})"
    )));
    let (description, anchor) = if alpha == -0.125 {
        (
            "Gaussian weight, a = -1/8: quadratic + constant + inverse-square improvements",
            ("gaussian-weight-improved",
             "int |grad u|^2 K >= 1/16 int u^2 r^2 K + n/4 int u^2 K + (n-2)^2/4 int u^2 K/r^2"),
        )
    } else {
        (
            "Gaussian weight, a = -1/4: the classical heat-kernel form",
            ("gaussian-weight-classical",
             "int |grad u|^2 K >= (n-2)^2/4 int u^2 K/r^2 + (n+2)/4 int u^2 K"),
        )
    };
    Scenario {
        id,
        description,
        anchors: anchors(&[
            anchor,
            ("gaussian-weight-identity", "one-parameter Gaussian potential family behind both bounds"),
        ]),
        plan: vec![
            Check::Identity(IdentityCheck::new(
                prob.clone(),
                vec![[0.4, 1.6], [0.4, 1.6], [0.4, 1.6]],
                32,
            )),
            Check::WeightMatch {
                prob,
                sample_box: vec![[-1.6, 1.6], [-1.6, 1.6], [-1.6, 1.6]],
                points: 10_000,
                rel_tol: 1e-9,
            },
        ],
    }
}

fn hyperbolic_rho_str() -> String {
    format!("log((1 + {NORM3}) / (1 - {NORM3}))")
}

fn hyperbolic_62() -> Scenario {
    let n = 3.0;
    let rho = hyperbolic_rho_str();
    let ctx = GeometryContext::hyperbolic_ball(3);
    let prob = WeightProblem::potential(ctx, one(), e(&format!("pow({rho}, {})", (2.0 - n) / 2.0)))
        .with_closed_form(e(&format!(
            "0.25 / pow({rho}, 2) + (({rho}) * coth({rho}) - 1) / pow({rho}, 2)"
        )));
    Scenario {
        id: "hyperbolic-62",
        description: "hyperbolic distance weight: (n-2)^2/(4 rho^2) plus curvature remainder",
        anchors: anchors(&[(
            "hyperbolic-distance-pair",
            "int |grad u|^2 >= (n-2)^2/4 int u^2/rho^2 + (n-1)(n-2)/2 int (rho coth rho - 1)/rho^2 u^2",
        )]),
        plan: vec![
            Check::Identity(IdentityCheck::new(
                prob.clone(),
                vec![[0.08, 0.22], [0.08, 0.22], [0.08, 0.22]],
                32,
            )),
            Check::WeightMatch {
                prob,
                sample_box: vec![[0.03, 0.25], [0.03, 0.25], [0.03, 0.25]],
                points: 10_000,
                rel_tol: 1e-9,
            },
        ],
    }
}

fn hyperbolic_63() -> Scenario {
    let rho = hyperbolic_rho_str();
    let ctx = GeometryContext::hyperbolic_ball(3);
    // n = 3: (n-1)(n-3)/4 = 0, constant term (n-1)^2/4 = 1
    let prob = WeightProblem::potential(
        ctx,
        one(),
        e(&format!("pow({rho}, 0.5) * pow(sinh({rho}), -1)")),
    )
    .with_closed_form(e(&format!("0.25 / pow({rho}, 2) + 1")));
    // n = 4 exercises the sinh^{-2} term pointwise
    let rho4 = "log((1 + norm(x1,x2,x3,x4)) / (1 - norm(x1,x2,x3,x4)))";
    let ctx4 = GeometryContext::hyperbolic_ball(4);
    let prob4 = WeightProblem::potential(
        ctx4,
        one(),
        e(&format!("pow({rho4}, 0.5) * pow(sinh({rho4}), -1.5)")),
    )
    .with_closed_form(e(&format!(
        "0.25 / pow({rho4}, 2) + 0.75 / pow(sinh({rho4}), 2) + 2.25"
    )));
    Scenario {
        id: "hyperbolic-63",
        description: "sharp hyperbolic remainder family: 1/(4 rho^2) + (n-1)(n-3)/(4 sinh^2) + (n-1)^2/4",
        anchors: anchors(&[(
            "hyperbolic-sharp-pair",
            "int |grad u|^2 >= 1/4 int u^2/rho^2 + (n-1)(n-3)/4 int u^2/sinh^2 rho + (n-1)^2/4 int u^2",
        )]),
        plan: vec![
            Check::Identity(IdentityCheck::new(
                prob.clone(),
                vec![[0.08, 0.22], [0.08, 0.22], [0.08, 0.22]],
                32,
            )),
            Check::WeightMatch {
                prob,
                sample_box: vec![[0.03, 0.25], [0.03, 0.25], [0.03, 0.25]],
                points: 10_000,
                rel_tol: 1e-9,
            },
            Check::WeightMatch {
                prob: prob4,
                sample_box: vec![[0.03, 0.2], [0.03, 0.2], [0.03, 0.2], [0.03, 0.2]],
                points: 10_000,
                rel_tol: 1e-9,
            },
        ],
    }
}

fn hyperbolic_thm61() -> Scenario {
    let rho = hyperbolic_rho_str();
    let ctx = GeometryContext::hyperbolic_ball(3);
    // optimal cosh exponent and remainder coefficient on the unit hyperbolic ball
    let j1 = 1.0 / 1.0f64.tanh() + 1.0 / 1.0f64.sinh().powi(2); // coth 1 + csch^2 1
    let alpha = -j1 / 2.0;
    let g_max = j1 * j1 / 4.0;
    let prob = WeightProblem::potential(
        ctx,
        one(),
        e(&format!(
            "pow({rho}, 0.5) * pow(sinh({rho}), -1) * pow(cosh({rho}), {alpha})"
        )),
    )
    .with_one_sided_closed_form(e(&format!(
        "0.25 / pow({rho}, 2) + 1 + {g_max} * pow(tanh({rho}), 2)"
    )));
    // rho <= 1 corresponds to r <= tanh(1/2) = 0.4621
    Scenario {
        id: "hyperbolic-thm61",
        description: "extra tanh^2 remainder on the unit hyperbolic ball via a cosh-corrected potential",
        anchors: anchors(&[(
            "hyperbolic-unit-ball-improvement",
            "on rho <= 1 the derived weight dominates the sharp family plus (coth1+csch^2 1)^2/4 tanh^2 rho",
        )]),
        plan: vec![
            Check::Identity(IdentityCheck::new(
                prob.clone(),
                vec![[0.05, 0.25], [0.05, 0.25], [0.05, 0.25]],
                32,
            )),
            Check::WeightMatch {
                prob,
                sample_box: vec![[0.03, 0.25], [0.03, 0.25], [0.03, 0.25]],
                points: 10_000,
                rel_tol: 1e-9,
            },
        ],
    }
}

fn edge_identity() -> Scenario {
    // n = 2, q = 1 keeps quadrature in 4 dimensions; the potential t^{q/2}
    // makes the derived weight exactly q^2/4
    let ctx = GeometryContext::edge(2, 1);
    let prob = WeightProblem::potential(ctx, one(), e("pow(t, 0.5)"))
        .with_closed_form(e("0.25"));
    Scenario {
        id: "edge-identity",
        description: "edge frame t d_t, d_x, t d_y with density t^{-1-q}: constant weight q^2/4",
        anchors: anchors(&[
            ("edge-laplacian-bound", "int |grad_E u|^2 t^{-1-q} >= q^2/4 int u^2 t^{-1-q}"),
            ("master-identity-unit-weight", "int |grad u|^2 = int (-Lap f/f) u^2 + int f^2 |grad(u/f)|^2"),
        ]),
        plan: vec![
            Check::Identity(IdentityCheck::new(
                prob.clone(),
                vec![[0.15, 0.85], [-1.0, 1.0], [-1.0, 1.0], [-1.0, 1.0]],
                28,
            )),
            Check::WeightMatch {
                prob,
                sample_box: vec![[0.1, 0.9], [-1.5, 1.5], [-1.5, 1.5], [-1.5, 1.5]],
                points: 2000,
                rel_tol: 1e-9,
            },
        ],
    }
}

fn edge_n1() -> Scenario {
    let ctx = GeometryContext::edge(1, 1);
    let prob = WeightProblem::potential(ctx, one(), e("pow(t, 0.5)"))
        .with_closed_form(e("0.25"));
    Scenario {
        id: "edge-n1",
        description: "one-dimensional horizontal slice of the edge model: weight q^2/4 survives",
        anchors: anchors(&[(
            "edge-laplacian-1d",
            "for n = 1 the same potential still yields q^2/4 int u^2",
        )]),
        plan: vec![Check::Identity(IdentityCheck::new(
            prob,
            vec![[0.15, 0.85], [-1.0, 1.0], [-1.0, 1.0]],
            32,
        ))],
    }
}

fn edge_thm71() -> Scenario {
    // n = 3 exercises the full bound; pointwise domination only (the 5-D
    // identity is covered structurally by edge-identity in 4-D)
    let n = 3.0;
    let q = 1.0;
    let ctx = GeometryContext::edge(3, 1);
    let psi = "(exp(-1/(t*t)) + x1*x1 + x2*x2 + x3*x3 + y1*y1)";
    let w0 = format!("exp(-1/(t*t)) / (t*t * {psi})");
    let c1 = (n - 2.0) * (n - 2.0) / 4.0;
    let c2 = q * q / 4.0;
    let c3 = (n - 2.0) * std::f64::consts::E.powi(2) / 8.0 * q;
    let prob = WeightProblem::potential(
        ctx,
        one(),
        e(&format!("pow(t, {}) * pow({psi}, {})", q / 2.0, (2.0 - n) / 4.0)),
    )
    .with_one_sided_closed_form(e(&format!("{c1} / {psi} + {c2} + {c3} * {w0}")));
    Scenario {
        id: "edge-thm71",
        description: "edge bound with smoothed distance psi: derived weight dominates the stated form",
        anchors: anchors(&[(
            "edge-laplacian-bound",
            "-Lap_E f / f >= (n-2)^2/(4 psi) + q^2/4 + (n-2)e^2 q/8 W_0",
        )]),
        plan: vec![Check::WeightMatch {
            prob,
            sample_box: vec![[0.05, 0.95], [-2.0, 2.0], [-2.0, 2.0], [-2.0, 2.0], [-2.0, 2.0]],
            points: 10_000,
            rel_tol: 1e-9,
        }],
    }
}

const R2H: &str = "(x1*x1 + y1*y1)";

fn heis_rho4() -> String {
    format!("({R2H}*{R2H} + t*t)")
}

fn heisenberg_81() -> Scenario {
    let rho4 = heis_rho4();
    let ctx = GeometryContext::heisenberg(1)
        .with_singular_set(SingularSet::Hyperplane { axis: 2, value: 0.0 });
    let prob = WeightProblem::potential(
        ctx,
        one(),
        e(&format!("pow({rho4}, -0.5) * pow(t, 0.5)")),
    )
    .with_closed_form(e(&format!("4 * {R2H} / {rho4} + {R2H} / (t*t)")));
    Scenario {
        id: "heisenberg-81",
        description: "gauge-and-time potential on H_1: W = (Q^2/4) r^2/rho^4 + r^2/t^2",
        anchors: anchors(&[(
            "heisenberg-time-pair",
            "int |grad_H u|^2 >= Q^2/4 int r^2/rho^4 u^2 + int r^2/t^2 u^2",
        )]),
        plan: vec![
            Check::Identity(IdentityCheck::new(
                prob.clone(),
                vec![[-1.0, 1.0], [-1.0, 1.0], [0.3, 1.3]],
                32,
            )),
            Check::WeightMatch {
                prob,
                sample_box: vec![[-1.5, 1.5], [-1.5, 1.5], [0.2, 1.8]],
                points: 10_000,
                rel_tol: 1e-9,
            },
        ],
    }
}

fn heisenberg_82() -> Scenario {
    let rho4 = heis_rho4();
    let ctx = GeometryContext::heisenberg(1)
        .with_singular_set(SingularSet::Hyperplane { axis: 2, value: 0.0 });
    let prob = WeightProblem::potential(ctx, one(), e(&format!("pow({rho4}, -0.75) * t")))
        .with_closed_form(e(&format!("9 * {R2H} / {rho4}")));
    Scenario {
        id: "heisenberg-82",
        description: "pure gauge potential on H_1: sharp coefficient (Q+2)^2/4 on r^2/rho^4",
        anchors: anchors(&[(
            "heisenberg-gauge-pair",
            "int |grad_H u|^2 >= (Q+2)^2/4 int r^2/rho^4 u^2",
        )]),
        plan: vec![
            Check::Identity(IdentityCheck::new(
                prob.clone(),
                vec![[-1.0, 1.0], [-1.0, 1.0], [0.3, 1.3]],
                32,
            )),
            Check::WeightMatch {
                prob,
                sample_box: vec![[-1.5, 1.5], [-1.5, 1.5], [0.2, 1.8]],
                points: 10_000,
                rel_tol: 1e-9,
            },
        ],
    }
}

fn heisenberg_83() -> Scenario {
    // n = 1 for the identity (where the horizontal factor degenerates), n = 2
    // pointwise for the full (Q-4)^2/(4 r^2) term
    let rho4 = heis_rho4();
    let ctx1 = GeometryContext::heisenberg(1)
        .with_singular_set(SingularSet::Hyperplane { axis: 2, value: 0.0 });
    let prob1 = WeightProblem::potential(ctx1, one(), e(&format!("pow({rho4}, -0.75) * t")))
        .with_closed_form(e(&format!("9 * {R2H} / {rho4}")));
    let r2h2 = "(x1*x1 + x2*x2 + y1*y1 + y2*y2)";
    let rho4h2 = format!("({r2h2}*{r2h2} + t*t)");
    let ctx2 = GeometryContext::heisenberg(2).with_singular_set(SingularSet::Union(vec![
        SingularSet::CoordsZero(vec![0, 1, 2, 3]),
        SingularSet::Hyperplane { axis: 4, value: 0.0 },
    ]));
    // Q = 6: f = rho^{-3} r^{-1} t, W = 1/r^2 + 9 r^2/rho^4
    let prob2 = WeightProblem::potential(
        ctx2,
        one(),
        e(&format!("pow({rho4h2}, -0.75) * pow({r2h2}, -0.5) * t")),
    )
    .with_closed_form(e(&format!("1 / {r2h2} + 9 * {r2h2} / {rho4h2}")));
    Scenario {
        id: "heisenberg-83",
        description: "horizontal-radius potential: (Q-4)^2/(4r^2) plus 9 r^2/rho^4",
        anchors: anchors(&[(
            "heisenberg-radial-pair",
            "int |grad_H u|^2 >= (Q-4)^2/4 int u^2/r^2 + 9 int r^2/rho^4 u^2",
        )]),
        plan: vec![
            Check::Identity(IdentityCheck::new(
                prob1,
                vec![[-1.0, 1.0], [-1.0, 1.0], [0.3, 1.3]],
                32,
            )),
            Check::WeightMatch {
                prob: prob2,
                sample_box: vec![
                    [0.2, 1.3],
                    [0.2, 1.3],
                    [0.2, 1.3],
                    [0.2, 1.3],
                    [0.3, 1.5],
                ],
                points: 10_000,
                rel_tol: 1e-9,
            },
        ],
    }
}

const GRUSHIN_SX: &str = "(x1*x1 + x2*x2 + x3*x3)";

fn grushin_rho4() -> String {
    // gamma = 1: rho^{2+2g} = |x|^4 + 4|y|^2
    format!("(pow({GRUSHIN_SX}, 2) + 4*y1*y1)")
}

fn grushin_92() -> Scenario {
    let rho4 = grushin_rho4();
    let ctx = GeometryContext::grushin(3, 1, 1.0).with_singular_set(SingularSet::Union(vec![
        SingularSet::CoordsZero(vec![0, 1, 2]),
        SingularSet::Hyperplane { axis: 3, value: 0.0 },
    ]));
    let prob = WeightProblem::potential(
        ctx,
        one(),
        e(&format!(
            "pow({GRUSHIN_SX}, -0.25) * pow(abs(y1), 0.5) * pow({rho4}, -0.5)"
        )),
    )
    .with_closed_form(e(&format!(
        "0.25 / {GRUSHIN_SX} + 0.25 * {GRUSHIN_SX} / (y1*y1) + 4 * {GRUSHIN_SX} / {rho4}"
    )));
    let bx = vec![[0.3, 1.0], [0.3, 1.0], [0.3, 1.0], [0.3, 1.0]];
    Scenario {
        id: "grushin-92",
        description: "split Grushin potential: both inverse-square parts plus the gauge term",
        anchors: anchors(&[(
            "grushin-split-pair",
            "int |grad_G u|^2 >= (d-2)^2/4 int u^2/|x|^2 + (k-2)^2/4 int |x|^{2g} u^2/|y|^2 + (1+g)^2 int |x|^{2g}/rho^{2+2g} u^2",
        )]),
        plan: vec![
            Check::Identity(IdentityCheck::new(prob.clone(), bx.clone(), 26)),
            Check::WeightMatch { prob, sample_box: bx, points: 10_000, rel_tol: 1e-9 },
        ],
    }
}

fn grushin_93() -> Scenario {
    let rho4 = grushin_rho4();
    let ctx = GeometryContext::grushin(3, 1, 1.0);
    let prob = WeightProblem::potential(
        ctx,
        one(),
        e(&format!("pow({GRUSHIN_SX}, -0.25) * pow({rho4}, -0.25)")),
    )
    .with_closed_form(e(&format!(
        "0.25 / {GRUSHIN_SX} + {GRUSHIN_SX} / {rho4}"
    )));
    Scenario {
        id: "grushin-93",
        description: "Grushin gauge improvement of the plain inverse-square bound",
        anchors: anchors(&[(
            "grushin-gauge-pair",
            "int |grad_G u|^2 >= (d-2)^2/4 int u^2/|x|^2 + k^2(1+g)^2/4 int |x|^{2g}/rho^{2+2g} u^2",
        )]),
        plan: vec![
            Check::Identity(IdentityCheck::new(
                prob.clone(),
                vec![[0.3, 1.0], [0.3, 1.0], [0.3, 1.0], [-0.7, 0.7]],
                26,
            )),
            Check::WeightMatch {
                prob,
                sample_box: vec![[0.2, 1.2], [0.2, 1.2], [0.2, 1.2], [-1.0, 1.0]],
                points: 10_000,
                rel_tol: 1e-9,
            },
        ],
    }
}

fn grushin_94() -> Scenario {
    let rho4 = grushin_rho4();
    let ctx = GeometryContext::grushin(3, 1, 1.0).with_singular_set(SingularSet::Union(vec![
        SingularSet::CoordsZero(vec![0, 1, 2]),
        SingularSet::Hyperplane { axis: 3, value: 0.0 },
    ]));
    let prob = WeightProblem::potential(
        ctx,
        one(),
        e(&format!("pow(abs(y1), 0.5) * pow({rho4}, -0.625)")),
    )
    .with_closed_form(e(&format!(
        "0.25 * {GRUSHIN_SX} / (y1*y1) + 6.25 * {GRUSHIN_SX} / {rho4}"
    )));
    let bx = vec![[0.3, 1.0], [0.3, 1.0], [0.3, 1.0], [0.3, 1.0]];
    Scenario {
        id: "grushin-94",
        description: "vertical Grushin potential: (k-2)^2/4 and (d+2g)^2/4 coefficients",
        anchors: anchors(&[(
            "grushin-mixed-pair",
            "int |grad_G u|^2 >= (k-2)^2/4 int |x|^{2g} u^2/|y|^2 + (d+2g)^2/4 int |x|^{2g}/rho^{2+2g} u^2",
        )]),
        plan: vec![
            Check::Identity(IdentityCheck::new(prob.clone(), bx.clone(), 26)),
            Check::WeightMatch { prob, sample_box: bx, points: 10_000, rel_tol: 1e-9 },
        ],
    }
}

fn lp_euclidean() -> Scenario {
    let ctx = GeometryContext::euclidean(3);
    let f = e(&format!("pow({NORM3}, -1)"));
    let bx = vec![[1.0, 2.0], [1.0, 2.0], [1.0, 2.0]];
    // p = 1.5: f = |x|^{1-n/p}, W = |(n-p)/p|^p |x|^{-p} = |x|^{-1.5}
    let prob15 = WeightProblem::field(ctx.clone(), one(), FrameVector::NegLogGrad(f.clone()))
        .with_p(1.5)
        .with_closed_form(e(&format!("pow({NORM3}, -1.5)")));
    // p = 3 with the same (non-optimal) profile: W = (n+1-2p)|x|^{-p} = -2|x|^{-3}
    let prob3 = WeightProblem::field(ctx.clone(), one(), FrameVector::NegLogGrad(f.clone()))
        .with_p(3.0)
        .with_closed_form(e(&format!("-2 * pow({NORM3}, -3)")));
    let prob2 = WeightProblem::field(ctx, one(), FrameVector::NegLogGrad(f)).with_p(2.0);
    let mut c15 = IdentityCheck::new(prob15.clone(), bx.clone(), 32);
    c15.seed_mode = SeedMode::SignDefinite;
    Scenario {
        id: "lp-euclidean",
        description: "L^p identities on R^3 for p in {1.5, 2, 3} with power profiles",
        anchors: anchors(&[
            ("lp-identity",
             "int V|grad u|^p = int [div(V|F|^{p-2}F) - (p-1)V|F|^p] |u|^p + int V R(u,F), R >= 0"),
            ("lp-euclidean-power", "int |grad u|^p >= |(n-p)/p|^p int |u|^p/|x|^p"),
        ]),
        plan: vec![
            Check::IdentityLp(c15),
            Check::IdentityLp(IdentityCheck::new(prob3.clone(), bx.clone(), 24)),
            Check::WeightMatch {
                prob: prob15,
                sample_box: bx.clone(),
                points: 10_000,
                rel_tol: 1e-9,
            },
            Check::WeightMatch {
                prob: prob3,
                sample_box: bx.clone(),
                points: 10_000,
                rel_tol: 1e-9,
            },
            Check::LpReduction { prob: prob2, support: bx, nodes: 20, rel_tol: 1e-11 },
        ],
    }
}

fn lp_heisenberg() -> Scenario {
    let rho4 = heis_rho4();
    let sing = SingularSet::Union(vec![
        SingularSet::CoordsZero(vec![0, 1]),
        SingularSet::Hyperplane { axis: 2, value: 0.0 },
    ]);
    let bx = vec![[0.25, 1.2], [0.25, 1.2], [0.3, 1.3]];
    // p = 2, alpha = 4, beta = 2 (V = 1): W = r^2/rho^4
    let ctx = GeometryContext::heisenberg(1).with_singular_set(sing.clone());
    let prob2 = WeightProblem::field(
        ctx.clone(),
        one(),
        FrameVector::NegLogGrad(e(&format!("pow({rho4}, -0.25)"))),
    )
    .with_p(2.0)
    .with_closed_form(e(&format!("{R2H} / {rho4}")));
    // p = 3, alpha = 2, beta = 1: V = r^{-2} rho^4, W = r/rho^2
    let prob3 = WeightProblem::field(
        ctx,
        e(&format!("pow({R2H}, -1) * {rho4}")),
        FrameVector::NegLogGrad(e(&format!("pow({rho4}, -0.25)"))),
    )
    .with_p(3.0)
    .with_closed_form(e(&format!("pow({R2H}, 0.5) / pow({rho4}, 0.5)")));
    Scenario {
        id: "lp-heisenberg",
        description: "L^p gauge inequalities on H_1 with weights r^{b-p} rho^{2p-a}",
        anchors: anchors(&[(
            "lp-heisenberg-gauge",
            "int r^{b-p} rho^{2p-a} |grad_H u|^p >= ((2n+2+b-a)/p)^p int r^b/rho^a |u|^p",
        )]),
        plan: vec![
            Check::IdentityLp(IdentityCheck::new(prob2.clone(), bx.clone(), 32)),
            Check::IdentityLp(IdentityCheck::new(prob3.clone(), bx.clone(), 24)),
            Check::WeightMatch {
                prob: prob2,
                sample_box: bx.clone(),
                points: 10_000,
                rel_tol: 1e-9,
            },
            Check::WeightMatch { prob: prob3, sample_box: bx, points: 10_000, rel_tol: 1e-9 },
        ],
    }
}

static CATALOG: OnceLock<Vec<Scenario>> = OnceLock::new();

/// The full scenario catalog, in stable order.
pub fn catalog() -> &'static [Scenario] {
    CATALOG.get_or_init(|| {
        vec![
            classical_hardy_n3(),
            classical_hardy_weighted(),
            radial_hardy(),
            leray_disc(),
            wang_willem(),
            cone_bcm(),
            multipolar(PoleRegime::SelfAndInteraction),
            multipolar(PoleRegime::InteractionOnly),
            bessel_classical(),
            bessel_disc(),
            bessel_leray(),
            bbdgv_subcritical(),
            bbdgv_supercritical(),
            mazya_identity(),
            mazya_lambda(),
            exp_weight("exp-weight-52", -0.125),
            exp_weight("exp-weight-53", -0.25),
            hyperbolic_62(),
            hyperbolic_63(),
            hyperbolic_thm61(),
            edge_identity(),
            edge_n1(),
            edge_thm71(),
            heisenberg_81(),
            heisenberg_82(),
            heisenberg_83(),
            grushin_92(),
            grushin_93(),
            grushin_94(),
            lp_euclidean(),
            lp_heisenberg(),
        ]
    })
}

/// Stable one-line summaries.
#[derive(Debug, Clone)]
pub struct ScenarioSummary {
    pub id: &'static str,
    pub description: &'static str,
    pub anchors: Vec<Anchor>,
}

pub fn list_scenarios() -> Vec<ScenarioSummary> {
    catalog()
        .iter()
        .map(|s| ScenarioSummary {
            id: s.id,
            description: s.description,
            anchors: s.anchors.clone(),
        })
        .collect()
}

pub fn find_scenario(id: &str) -> Option<&'static Scenario> {
    catalog().iter().find(|s| s.id == id)
}

/// Anchor keys that must each appear in at least one catalog scenario; a
/// catalog test machine-checks this coverage.
pub fn required_anchor_keys() -> &'static [&'static str] {
    &[
        "master-identity-field",
        "master-identity-potential",
        "master-identity-unit-weight",
        "inverse-square",
        "inverse-square-weighted",
        "radial-derivative-identity",
        "log-weight-2d",
        "log-weight-general",
        "cone-monomial-weight",
        "bessel-pair-ode",
        "bessel-pair-constant",
        "multipolar-self-interaction",
        "multipolar-interaction-only",
        "smooth-bump-weight-constant-subcritical",
        "smooth-bump-weight-constant-supercritical",
        "halfspace-distance-weight",
        "halfspace-angular-eigenvalue",
        "gaussian-weight-identity",
        "gaussian-weight-improved",
        "gaussian-weight-classical",
        "hyperbolic-distance-pair",
        "hyperbolic-sharp-pair",
        "hyperbolic-unit-ball-improvement",
        "edge-laplacian-bound",
        "edge-laplacian-1d",
        "heisenberg-time-pair",
        "heisenberg-gauge-pair",
        "heisenberg-radial-pair",
        "grushin-split-pair",
        "grushin-gauge-pair",
        "grushin-mixed-pair",
        "lp-identity",
        "lp-euclidean-power",
        "lp-heisenberg-gauge",
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalog_builds_and_has_enough_scenarios() {
        let cat = catalog();
        assert!(cat.len() >= 18, "catalog has {}", cat.len());
        let ids: Vec<_> = cat.iter().map(|s| s.id).collect();
        assert!(ids.contains(&"classical-hardy-n3"));
        assert!(ids.contains(&"mazya-lambda"));
        // unique ids
        let mut sorted = ids.clone();
        sorted.sort();
        sorted.dedup();
        assert_eq!(sorted.len(), ids.len());
    }

    #[test]
    fn anchor_coverage_is_machine_checked() {
        let mut covered: Vec<String> = Vec::new();
        for s in catalog() {
            assert!(!s.anchors.is_empty(), "{} has no anchors", s.id);
            for a in &s.anchors {
                covered.push(a.reference.clone());
            }
        }
        for key in required_anchor_keys() {
            assert!(
                covered.iter().any(|c| c == key),
                "anchor `{key}` not covered by any scenario"
            );
        }
    }

    #[test]
    fn stable_order() {
        let a: Vec<_> = list_scenarios().iter().map(|s| s.id).collect();
        let b: Vec<_> = list_scenarios().iter().map(|s| s.id).collect();
        assert_eq!(a, b);
    }
}

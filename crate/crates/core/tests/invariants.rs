use preserverlab::canon::{
    area_canon_2d, area_canon_highd, comm_canon_2x2, comm_canon_general, extend_projection_map,
    query_plan, wigner_complex, wigner_real, CanonConfig, Target,
};
use preserverlab::gauge::GaugeNorm;
use preserverlab::harness::{
    tabulate, CorruptionKind, Family, MapSpec, RealMatrixSource, Rule, RuleInput, UnitarySource,
};
use preserverlab::maps::{vector_map, BlackBoxMap, Space, VectorMap};
use preserverlab::random::haar_orthogonal;
use preserverlab::Error;

fn signed_linear(d: usize, seed: u64) -> MapSpec {
    MapSpec {
        space: Space::RealEuclidean { dim: d },
        family: Family::SignedLinear {
            matrix: RealMatrixSource::Haar { haar_seed: seed },
            sign_rule: Rule::SeededHash { seed },
        },
    }
}

fn conjugation(d: usize, seed: u64, antiunitary: bool) -> MapSpec {
    MapSpec {
        space: Space::Hermitian { dim: d },
        family: Family::ConjugationAffine {
            unitary: UnitarySource::Haar { haar_seed: seed },
            antiunitary,
            tau_rule: Rule::SeededHash { seed },
            f_rule: Rule::Trace,
        },
    }
}

fn projection(d: usize, seed: u64, antiunitary: bool, rule: Rule) -> MapSpec {
    MapSpec {
        space: Space::Hermitian { dim: d },
        family: Family::ProjectionMap {
            unitary: UnitarySource::Haar { haar_seed: seed },
            antiunitary,
            complement_choice_rule: rule,
        },
    }
}

fn corrupt(spec: MapSpec, kind: CorruptionKind, magnitude: f64, seed: u64) -> MapSpec {
    MapSpec {
        space: spec.space,
        family: Family::Corrupted {
            base: Box::new(spec.family),
            kind,
            magnitude,
            seed,
        },
    }
}

fn table_of(spec: &MapSpec, target: Target, norm: &GaugeNorm, cfg: &CanonConfig) -> BlackBoxMap {
    let live = spec.make_map().unwrap();
    let plan = query_plan(target, spec.dim(), norm, cfg).unwrap();
    let entries = tabulate(&live, &plan).unwrap();
    MapSpec {
        space: spec.space,
        family: Family::Table { entries },
    }
    .make_map()
    .unwrap()
}

#[test]
fn table_backed_area_forms_match_live_evaluation() {
    for d in [2, 3, 5] {
        let spec = signed_linear(d, 40 + d as u64);
        let cfg = CanonConfig::new(3);
        let live = spec.make_map().unwrap();
        let table = table_of(&spec, Target::Area, &GaugeNorm::Operator, &cfg);
        let canon = |m: &dyn VectorMap| {
            if d == 2 {
                area_canon_2d(m, &cfg)
            } else {
                area_canon_highd(m, &cfg)
            }
            .unwrap()
        };
        assert_eq!(
            canon(live.as_vector().unwrap()),
            canon(table.as_vector().unwrap())
        );
    }
}

#[test]
fn table_backed_wigner_real_matches_live_evaluation() {
    let spec = signed_linear(4, 77);
    let cfg = CanonConfig::new(1);
    let table = table_of(&spec, Target::WignerReal, &GaugeNorm::Operator, &cfg);
    let live = wigner_real(spec.make_map().unwrap().as_vector().unwrap(), &cfg).unwrap();
    assert_eq!(live, wigner_real(table.as_vector().unwrap(), &cfg).unwrap());
}

#[test]
fn table_backed_comm_forms_match_live_evaluation() {
    let norm = GaugeNorm::KyFan(2);
    for (d, anti) in [(2, false), (3, true), (4, false)] {
        let spec = conjugation(d, 60 + d as u64, anti);
        let cfg = CanonConfig::new(9);
        let table = table_of(&spec, Target::CommNorm, &norm, &cfg);
        let live =
            comm_canon_general(spec.make_map().unwrap().as_matrix().unwrap(), &norm, &cfg).unwrap();
        let tabled = comm_canon_general(table.as_matrix().unwrap(), &norm, &cfg).unwrap();
        assert_eq!(live, tabled);
    }
}

#[test]
fn table_backed_projection_forms_match_live_evaluation() {
    let cfg = CanonConfig::new(4);
    let spec = projection(3, 21, true, Rule::Constant { value: 1.0 });
    let table = table_of(&spec, Target::WignerComplex, &GaugeNorm::Operator, &cfg);
    let live = wigner_complex(spec.make_map().unwrap().as_matrix().unwrap(), &cfg).unwrap();
    assert_eq!(
        live,
        wigner_complex(table.as_matrix().unwrap(), &cfg).unwrap()
    );

    let norm = GaugeNorm::Schatten(2.0);
    let spec = projection(2, 22, false, Rule::SeededHash { seed: 5 });
    let table = table_of(&spec, Target::ExtendProjection, &norm, &cfg);
    let run = |m: &BlackBoxMap| {
        let ext = extend_projection_map(m.as_matrix().unwrap(), &cfg).unwrap();
        comm_canon_2x2(&ext, &norm, &cfg).unwrap()
    };
    assert_eq!(run(&spec.make_map().unwrap()), run(&table));
}

#[test]
fn table_without_plan_points_reports_missing_sample() {
    let spec = signed_linear(3, 5);
    let cfg = CanonConfig::new(0);
    let table = table_of(
        &spec,
        Target::Area,
        &GaugeNorm::Operator,
        &CanonConfig::new(1),
    );
    let err = area_canon_highd(table.as_vector().unwrap(), &cfg).unwrap_err();
    assert!(matches!(err, Error::MissingSample(_)), "{err}");
}

#[test]
fn flipping_both_signs_gives_the_same_form() {
    for d in [2, 3, 6] {
        let r = haar_orthogonal(d, 8).unwrap();
        let rule = Rule::SeededHash { seed: 12 };
        let m = vector_map(d, {
            let r = r.clone();
            move |v| &r * v * rule.sign(&RuleInput::vector(v))
        });
        let neg = vector_map(d, {
            let r = -r.clone();
            move |v| &r * v * -rule.sign(&RuleInput::vector(v))
        });
        let cfg = CanonConfig::new(2);
        let canon = |m: &dyn VectorMap| {
            if d == 2 {
                area_canon_2d(m, &cfg)
            } else {
                area_canon_highd(m, &cfg)
            }
            .unwrap()
        };
        let (a, b) = (canon(&m), canon(&neg));
        assert_eq!(a.residual, b.residual);
        assert_eq!(a.linear_part, b.linear_part);
    }
}

#[test]
fn general_and_2x2_canonicalizers_agree_on_c2() {
    for seed in 0..10 {
        let spec = conjugation(2, seed, seed % 3 == 0);
        let map = spec.make_map().unwrap();
        let m = map.as_matrix().unwrap();
        let norm = GaugeNorm::Schatten(1.0);
        let cfg = CanonConfig::new(seed);
        let a = comm_canon_general(m, &norm, &cfg).unwrap();
        let b = comm_canon_2x2(m, &norm, &cfg).unwrap();
        assert_eq!(a.antiunitary, b.antiunitary);
        let t = (b.unitary.adjoint() * &a.unitary).trace();
        assert!((t.norm() - 2.0).abs() < 1e-9);
        assert!(a.residual <= 2.0 * b.residual.max(1e-15));
    }
}

#[test]
fn scalar_inputs_get_positive_tau() {
    let spec = conjugation(3, 2, false);
    let map = spec.make_map().unwrap();
    let m = map.as_matrix().unwrap();
    let form = comm_canon_general(m, &GaugeNorm::Operator, &CanonConfig::new(0)).unwrap();
    for t in [-2.0, 0.0, 0.5, 3.0] {
        let a = preserverlab::linalg::CMat::identity(3, 3) * preserverlab::linalg::c(t, 0.0);
        let fit = form.fit_at(m, &a).unwrap();
        assert_eq!(fit.tau, 1.0);
        assert!(fit.residual < 1e-12);
    }
}

fn rejected<T: std::fmt::Debug>(r: preserverlab::Result<T>, what: &str) {
    match r {
        Err(Error::NotAPreserver(_)) | Err(Error::Precondition(_)) => {}
        other => panic!("{what}: expected rejection, got {other:?}"),
    }
}

const KINDS: [CorruptionKind; 3] = [
    CorruptionKind::ScaleSingularValue,
    CorruptionKind::NonscalarOffset,
    CorruptionKind::Noise,
];

#[test]
fn area_canonicalizers_reject_corrupted_maps() {
    for kind in KINDS {
        for seed in 0..50 {
            let d = 2 + seed as usize % 7;
            let spec = corrupt(signed_linear(d, seed), kind, 1e-3, seed);
            let map = spec.make_map().unwrap();
            let m = map.as_vector().unwrap();
            let cfg = CanonConfig::new(seed);
            let what = format!("{kind:?} d={d} seed {seed}");
            if d == 2 {
                rejected(area_canon_2d(m, &cfg), &what);
            } else {
                rejected(area_canon_highd(m, &cfg), &what);
            }
            rejected(wigner_real(m, &cfg), &what);
        }
    }
}

#[test]
fn comm_canonicalizer_rejects_corrupted_maps() {
    for kind in KINDS {
        for seed in 0..50 {
            let d = 2 + seed as usize % 3;
            let spec = corrupt(conjugation(d, seed, seed % 2 == 0), kind, 1e-3, seed);
            let map = spec.make_map().unwrap();
            let norm = GaugeNorm::standard_battery(d)[seed as usize % (4 + d)];
            rejected(
                comm_canon_general(map.as_matrix().unwrap(), &norm, &CanonConfig::new(seed)),
                &format!("{kind:?} d={d} seed {seed}"),
            );
        }
    }
}

#[test]
fn projection_canonicalizers_reject_corrupted_maps() {
    for kind in KINDS {
        for seed in 0..50 {
            let cfg = CanonConfig::new(seed);
            let what = format!("{kind:?} seed {seed}");
            let d = 3 + seed as usize % 2;
            let spec = corrupt(
                projection(d, seed, seed % 2 == 1, Rule::Constant { value: 1.0 }),
                kind,
                1e-3,
                seed,
            );
            rejected(
                wigner_complex(spec.make_map().unwrap().as_matrix().unwrap(), &cfg),
                &what,
            );

            let spec = corrupt(
                projection(2, seed, false, Rule::SeededHash { seed }),
                kind,
                1e-3,
                seed,
            );
            let map = spec.make_map().unwrap();
            let phi = map.as_matrix().unwrap();
            let result = extend_projection_map(phi, &cfg)
                .and_then(|ext| comm_canon_2x2(&ext, &GaugeNorm::Schatten(2.0), &cfg));
            rejected(result, &what);
            rejected(wigner_complex(phi, &cfg), &what);
        }
    }
}

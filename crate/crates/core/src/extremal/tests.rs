use super::*;
use crate::metric::fixtures::{square, two_point};
use crate::metric::{gallery, segment_is_trivial, Family};

fn pid(s: &MetricSpace, l: &str) -> PointId {
    s.point(l).unwrap()
}

fn checked(s: &MetricSpace, v: Verdict) -> Verdict {
    if let Err(e) = check_verdict(s, &v) {
        panic!("checker rejected {:?} {:?}: {e}\n{v:#?}", v.property, v.pair);
    }
    v
}

#[test]
fn square_extreme_verdicts() {
    let s = square();
    let v = checked(&s, is_extreme(&s, pid(&s, "0"), pid(&s, "a")).unwrap());
    assert_eq!(v.status, Status::Proven);
    let v = checked(&s, is_extreme(&s, pid(&s, "0"), pid(&s, "b")).unwrap());
    assert_eq!(v.status, Status::Refuted);
    assert_eq!(v.evidence[0].witness, vec!["a".to_string()]);
}

#[test]
fn square_exposure_verdicts() {
    let s = square();
    let v = checked(&s, is_exposed_by_fxy(&s, pid(&s, "0"), pid(&s, "a")).unwrap());
    assert_eq!(v.status, Status::Proven);
    let v = checked(&s, is_exposed_by_fxy(&s, pid(&s, "0"), pid(&s, "b")).unwrap());
    assert_eq!(v.status, Status::Refuted);
    let t = two_point();
    let v = checked(&t, is_exposed_by_fxy(&t, pid(&t, "0"), pid(&t, "a")).unwrap());
    assert_eq!(v.status, Status::Proven);
    assert_eq!(v.evidence[0].lhs, int(-1));
}

#[test]
fn finite_trivial_segments_collapse() {
    let s = square();
    let rows = classify_all(&s, &ClassifyOptions::default()).unwrap();
    assert_eq!(rows.len(), 12);
    let proven = rows.iter().filter(|r| r.extreme.is_proven()).count();
    assert_eq!(proven, 8);
    for r in &rows {
        assert!(r.chain_holds());
        let all = [&r.extreme, &r.exposed_by_fxy, &r.denting, &r.strongly_exposed];
        assert!(all.iter().all(|v| v.status == r.extreme.status));
        assert_eq!(r.oracle_extreme, Some(r.extreme.is_proven()));
        for v in all {
            checked(&s, v.clone());
        }
    }
}

#[test]
fn finite_z_fails_at_computed_level() {
    let s = square();
    let (x, y) = (pid(&s, "0"), pid(&s, "a"));
    let v = checked(&s, has_property_z(&s, x, y, DEFAULT_DEPTH).unwrap());
    assert_eq!(v.status, Status::Refuted);
    // excess/min is 2/1 for both b and c, so level 1 already fails
    assert!(v.evidence.iter().all(|e| e.level == Some(int(1))));
    let v = checked(&s, is_strongly_exposed(&s, x, y, DEFAULT_DEPTH).unwrap());
    assert_eq!(v.status, Status::Proven);
}

#[test]
fn finite_denting_table() {
    let s = square();
    let (x, y) = (pid(&s, "0"), pid(&s, "a"));
    let v = checked(&s, is_denting(&s, x, y, &default_eps_grid()).unwrap());
    assert_eq!(v.status, Status::Proven);
    let rows: Vec<_> = v.rows(EvidenceKind::DentingRow).collect();
    assert_eq!(rows.len(), 5);
    // b and c both have min-distance 1 and sum 3: delta = 1 - 1/3
    assert!(rows.iter().all(|r| r.lhs == ratio(2, 3)));
}

#[test]
fn ag_pair_reproduces_the_counterexample() {
    let s = gallery("ag", 12).unwrap();
    let (o, x1) = (pid(&s, "0"), pid(&s, "x1"));
    let ex = checked(&s, is_extreme(&s, o, x1).unwrap());
    assert_eq!(ex.status, Status::Proven);
    let de = checked(&s, is_denting(&s, o, x1, &default_eps_grid()).unwrap());
    assert_eq!(de.status, Status::Refuted);
    for r in de.rows(EvidenceKind::DentingFailure) {
        let m = Family::Ag.index_of(&r.witness[0]).unwrap() as i64;
        assert_eq!(r.excess, Some(ratio(2, m)));
        assert_eq!(r.min_distance, Some(int(1) + ratio(1, m)));
    }
    let se = checked(&s, is_strongly_exposed(&s, o, x1, 20).unwrap());
    assert_eq!(se.status, Status::Refuted);
    let zs: Vec<_> = se.rows(EvidenceKind::ZWitness).collect();
    assert_eq!(zs.len(), 20);
    for r in zs {
        let n = rational::floor_to_u64(r.level.as_ref().unwrap()) as usize;
        let m = Family::Ag.index_of(&r.witness[0]).unwrap();
        assert!(m >= 2 * n, "level {n} witness x{m}");
    }
}

#[test]
fn tree_pair_is_denting_but_not_strongly_exposed() {
    let s = gallery("tree_omega", 12).unwrap();
    let (xi, o) = (pid(&s, "xinf"), pid(&s, "0"));
    let de = checked(&s, is_denting(&s, xi, o, &default_eps_grid()).unwrap());
    assert_eq!(de.status, Status::Proven);
    assert_eq!(de.rows(EvidenceKind::DentingRow).count(), 5);
    let z = checked(&s, has_property_z(&s, xi, o, 20).unwrap());
    assert_eq!(z.status, Status::Proven);
    for r in z.rows(EvidenceKind::ZWitness) {
        let n = rational::floor_to_u64(r.level.as_ref().unwrap()) as usize;
        let m = Family::TreeOmega.index_of(&r.witness[0]).unwrap();
        assert!(m + 1 >= 2 * n);
    }
    let row = classify_pair(&s, xi, o, &ClassifyOptions::default()).unwrap();
    assert!(row.extreme.is_proven() && row.denting.is_proven() && row.strongly_exposed.is_refuted());
}

#[test]
fn every_gallery_row_keeps_the_chain_and_checks() {
    for fam in Family::ALL {
        let s = gallery(fam.name(), 7).unwrap();
        for row in classify_all(&s, &ClassifyOptions::default()).unwrap() {
            assert!(row.chain_holds(), "{fam} {:?}", row.molecule);
            for v in [&row.extreme, &row.exposed_by_fxy, &row.denting, &row.strongly_exposed] {
                checked(&s, v.clone());
            }
        }
    }
}

#[test]
fn tampered_evidence_is_rejected() {
    let s = square();
    let mut v = is_extreme(&s, pid(&s, "0"), pid(&s, "a")).unwrap();
    v.evidence[0].lhs = int(5);
    assert!(check_verdict(&s, &v).is_err());
    let mut v = is_extreme(&s, pid(&s, "0"), pid(&s, "a")).unwrap();
    v.evidence.pop();
    assert!(check_verdict(&s, &v).is_err());
    let mut v = is_extreme(&s, pid(&s, "0"), pid(&s, "b")).unwrap();
    v.status = Status::Proven;
    assert!(check_verdict(&s, &v).is_err());
}

#[test]
fn segment_point_gives_constant_z_witness() {
    let s = square();
    let (x, y) = (pid(&s, "0"), pid(&s, "b"));
    assert!(!segment_is_trivial(&s, x, y).unwrap());
    let v = checked(&s, has_property_z(&s, x, y, 5).unwrap());
    assert_eq!(v.status, Status::Proven);
    assert_eq!(v.evidence.len(), 5);
    let d = checked(&s, is_denting(&s, x, y, &default_eps_grid()).unwrap());
    assert_eq!(d.status, Status::Refuted);
}

#[test]
fn bad_grids_are_rejected() {
    let s = square();
    let (x, y) = (pid(&s, "0"), pid(&s, "a"));
    for grid in [vec![], vec![int(0)], vec![ratio(1, 4), ratio(1, 2)]] {
        assert!(matches!(is_denting(&s, x, y, &grid), Err(Error::InvalidParameter(_))));
    }
    assert!(matches!(is_extreme(&s, x, x), Err(Error::InvalidPair(_))));
}

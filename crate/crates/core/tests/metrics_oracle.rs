//! Evaluation against values produced by `fixtures/metrics_oracle.py`, an
//! independent per-pixel brute-force implementation.

use std::collections::BTreeMap;

use keysel::metrics::{boundary_f, match_instances};
use keysel::{evaluate, FrameSize, InstanceId, LabelMap, RleMask};

const FIXTURE: &str = include_str!("fixtures/metrics_fixture.txt");
const EXPECTED: &str = include_str!("fixtures/metrics_expected.txt");

fn load() -> (Vec<LabelMap>, Vec<LabelMap>) {
    let lines: Vec<&str> = FIXTURE
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .collect();
    let field = |i: usize| -> usize { lines[i].split_whitespace().nth(1).unwrap().parse().unwrap() };
    let (frames, width, height) = (field(0), field(1) as u32, field(2) as u32);
    let size = FrameSize::new(width, height);
    let mut gt = vec![None; frames];
    let mut pred = vec![None; frames];
    let mut i = 3;
    while i < lines.len() {
        let mut head = lines[i].split_whitespace();
        let name = head.next().unwrap();
        let t: usize = head.next().unwrap().parse().unwrap();
        let dense: Vec<u32> = lines[i + 1..i + 1 + height as usize]
            .iter()
            .flat_map(|row| row.chars().map(|c| c.to_digit(10).unwrap()))
            .collect();
        let map = LabelMap::from_dense(size, &dense).unwrap();
        if name == "gt" {
            gt[t] = Some(map);
        } else {
            pred[t] = Some(map);
        }
        i += 1 + height as usize;
    }
    (
        gt.into_iter().map(Option::unwrap).collect(),
        pred.into_iter().map(Option::unwrap).collect(),
    )
}

fn expected() -> BTreeMap<String, String> {
    EXPECTED
        .lines()
        .filter(|l| !l.starts_with('#') && !l.trim().is_empty())
        .map(|l| {
            let (k, v) = l.split_once('=').unwrap();
            (k.trim().to_string(), v.trim().to_string())
        })
        .collect()
}

fn relabel(maps: &[LabelMap], to: &BTreeMap<u32, u32>) -> Vec<LabelMap> {
    maps.iter()
        .map(|m| {
            let dense: Vec<u32> = m.to_dense().into_iter().map(|l| *to.get(&l).unwrap_or(&l)).collect();
            LabelMap::from_dense(m.size(), &dense).unwrap()
        })
        .collect()
}

#[test]
fn report_matches_brute_force() {
    let (gt, pred) = load();
    let exp = expected();
    for tol in [0u32, 1, 2] {
        let r = evaluate(&pred, &gt, f64::from(tol)).unwrap();
        for (name, got) in r.rows() {
            let want: f64 = exp[&format!("tolerance{tol}.{name}")].parse().unwrap();
            assert!((got - want).abs() <= 1e-9, "tolerance {tol} {name}: {got} vs {want}");
        }
        let pairs: Vec<String> = match_instances(&pred, &gt, f64::from(tol))
            .unwrap()
            .pairs()
            .iter()
            .map(|(p, g)| format!("{p}:{g}"))
            .collect();
        assert_eq!(pairs.join(","), exp[&format!("tolerance{tol}.pairs")]);
    }
}

#[test]
fn single_precision_agrees() {
    let (gt, pred) = load();
    let exp = expected();
    let r = evaluate::<f32>(&pred, &gt, 1.0).unwrap();
    let want: f64 = exp["tolerance1.global_mean"].parse().unwrap();
    assert!((f64::from(r.global_mean) - want).abs() < 1e-5);
}

#[test]
fn relabelling_predictions_changes_nothing() {
    let (gt, pred) = load();
    let base = evaluate(&pred, &gt, 1.0).unwrap();
    for mapping in [[(5, 2), (7, 11), (9, 3)], [(5, 9), (7, 5), (9, 7)]] {
        let to: BTreeMap<u32, u32> = mapping.into_iter().collect();
        assert_eq!(evaluate(&relabel(&pred, &to), &gt, 1.0).unwrap(), base);
    }
}

#[test]
fn perfect_and_empty_predictions() {
    let (gt, _) = load();
    let r = evaluate(&gt, &gt, 1.0).unwrap();
    assert_eq!((r.j_mean, r.f_mean, r.j_recall, r.f_recall), (1.0, 1.0, 1.0, 1.0));
    assert_eq!((r.j_decay, r.f_decay, r.global_mean), (0.0, 0.0, 1.0));
    let empty: Vec<LabelMap> = gt.iter().map(|m| LabelMap::new(m.size())).collect();
    assert_eq!(evaluate(&empty, &gt, 1.0).unwrap().global_mean, 0.0);
}

#[test]
fn shifted_rectangle() {
    let exp = expected();
    let a = RleMask::rectangle(10, 8, 2, 2, 5, 4);
    let b = RleMask::rectangle(10, 8, 3, 2, 5, 4);
    assert_eq!(boundary_f(&a, &b, 1.0).unwrap(), 1.0);
    let want: f64 = exp["shifted_rectangle.tolerance0"].parse().unwrap();
    assert!((boundary_f(&a, &b, 0.0).unwrap() - want).abs() <= 1e-12);
    assert_eq!(want, 0.5714285714285714);
}

#[test]
fn replacing_a_frame_with_truth_never_lowers_j() {
    let (gt, pred) = load();
    let only = |maps: &[LabelMap], id: u32| -> Vec<LabelMap> {
        maps.iter()
            .map(|m| {
                let mut out = LabelMap::new(m.size());
                if let Some(mask) = m.get(InstanceId(id)) {
                    out.insert(InstanceId(1), mask.clone()).unwrap();
                }
                out
            })
            .collect()
    };
    let gt1 = only(&gt, 1);
    let pred1 = only(&pred, 5);
    let base = evaluate(&pred1, &gt1, 1.0).unwrap().j_mean;
    for t in 0..gt1.len() {
        let mut fixed = pred1.clone();
        fixed[t] = gt1[t].clone();
        assert!(evaluate(&fixed, &gt1, 1.0).unwrap().j_mean >= base);
    }
}

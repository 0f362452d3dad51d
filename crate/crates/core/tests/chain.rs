use num_complex::Complex64;
use trispin_core::chainlab::{
    chirality_operator, chirality_reference_states, diagonalize, duality_scan, subspace_overlap, zzz_chain,
};
use trispin_core::closedform::Boundary;

fn grid() -> Vec<f64> {
    (0..=50).map(|k| 0.5 + 0.02 * k as f64).collect()
}

#[test]
fn duality_minimum_approaches_one_with_size() {
    let a = duality_scan(&grid(), 9, Boundary::Periodic).unwrap();
    let b = duality_scan(&grid(), 12, Boundary::Periodic).unwrap();
    assert!((b.argmin - 1.0).abs() < (a.argmin - 1.0).abs(), "{} vs {}", a.argmin, b.argmin);
    assert!(b.points.iter().all(|p| p.gap.is_finite() && p.e0.is_finite()));
    let at_one = b.points.iter().find(|p| (p.bx - 1.0).abs() < 1e-12).unwrap();
    assert_eq!(at_one.duality, Some(0.0));
}

#[test]
fn ground_projector_matches_brute_force() {
    let n = 9;
    let h = zzz_chain(0.0, 0.0, n, Boundary::Periodic).unwrap();
    let d = h.diagonal();
    let min = d.iter().copied().fold(f64::INFINITY, f64::min);
    for c in 0..1usize << n {
        let z = |s: usize| if c >> (n - 1 - s) & 1 == 0 { 1.0 } else { -1.0 };
        let all_plus = (0..n).all(|j| z(j) * z((j + 1) % n) * z((j + 2) % n) == 1.0);
        assert_eq!(d[c] == min, all_plus);
    }
}

#[test]
fn paramagnetic_limit() {
    let n = 6;
    let h = zzz_chain(40.0, 0.0, n, Boundary::Periodic).unwrap().to_dense_real();
    let r = diagonalize(&h, Some(1)).unwrap();
    let v = &r.eigenvectors.unwrap()[0];
    let plus = vec![Complex64::new((1.0 / 64f64).sqrt(), 0.0); 64];
    assert!(subspace_overlap(&plus, &[v.clone()]) > 0.999);
}

#[test]
fn conjugated_states_span_the_upper_sector() {
    let chi = chirality_operator(&[[0, 1, 2]], 3).unwrap();
    let r = diagonalize(&chi, Some(8)).unwrap();
    let vecs = r.eigenvectors.unwrap();
    for s in chirality_reference_states() {
        let conj: Vec<Complex64> = s.iter().map(|z| z.conj()).collect();
        assert!((subspace_overlap(&conj, &vecs[6..]) - 1.0).abs() < 1e-12);
    }
}

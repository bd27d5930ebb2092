use kinex_web::{money_density, price_evolution, wealth_ccdf};

#[test]
fn ccdf_pairs_start_at_one_and_decrease() {
    let v = wealth_ccdf(200, 1.0, 50, 7).unwrap();
    assert_eq!(v.len() % 2, 0);
    assert_eq!(v[1], 1.0);
    let (xs, cs): (Vec<f64>, Vec<f64>) = v.chunks(2).map(|p| (p[0], p[1])).unzip();
    assert!(xs.windows(2).all(|w| w[0] < w[1]));
    assert!(cs.windows(2).all(|w| w[0] > w[1]));
    assert_eq!(v, wealth_ccdf(200, 1.0, 50, 7).unwrap());
}

#[test]
fn price_histograms_count_every_agent() {
    let v = price_evolution(300, 1.0, 1000, 3, 20).unwrap();
    assert_eq!(v.len(), 4 * 20);
    for snap in v.chunks(20) {
        assert_eq!(snap.iter().sum::<f64>(), 300.0);
    }
    let mean_bin = |s: &[f64]| s.iter().enumerate().map(|(i, c)| i as f64 * c).sum::<f64>() / 300.0;
    assert!(mean_bin(&v[60..]) < mean_bin(&v[..20]));
}

#[test]
fn money_density_shapes_differ_with_saving() {
    let dy = money_density(0.0, 1000, 200, 1, 25).unwrap();
    let cc = money_density(0.5, 1000, 200, 1, 25).unwrap();
    let argmax = |v: &[f64]| (0..v.len()).max_by(|&a, &b| v[a].total_cmp(&v[b])).unwrap();
    assert_eq!(argmax(&dy), 0);
    assert!(argmax(&cc) > 0);
    assert!(money_density(1.0, 100, 10, 1, 10).is_err());
}

#[test]
fn oversized_requests_are_refused() {
    assert!(wealth_ccdf(100_000, 1.0, 10_000, 1).is_err());
}

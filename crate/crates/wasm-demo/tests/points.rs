use wch_wasm_demo::{kernel_points, layer_points, willmore_points};

#[test]
fn layer_matches_tanh() {
    let p = layer_points("quartic", 5.0, 101).unwrap();
    assert_eq!(p.len(), 202);
    for xy in p.chunks(2) {
        assert!((xy[1] - (xy[0] / 2f64.sqrt()).tanh()).abs() < 1e-10);
    }
    assert!(layer_points("sextic", 5.0, 10).is_err());
    assert!(layer_points("cosine", 5.0, 1).is_err());
}

#[test]
fn willmore_follows_closed_form() {
    let p = willmore_points(4, -100.0, -10.0, 50).unwrap();
    assert_eq!(p[0], -100.0);
    for xy in p.chunks(2) {
        assert!((xy[1] - (-18.0 * xy[0]).powf(0.25)).abs() < 1e-8, "{xy:?}");
    }
    assert!(willmore_points(3, -100.0, -10.0, 50).is_err());
}

#[test]
fn kernel_starts_at_closed_form() {
    let p = kernel_points(1, 20.0, 201).unwrap();
    assert!((p[1] - 0.723_204).abs() < 1e-6);
    assert!(p.chunks(2).any(|xy| xy[1] < 0.0));
    assert!(kernel_points(0, 20.0, 10).is_err());
}

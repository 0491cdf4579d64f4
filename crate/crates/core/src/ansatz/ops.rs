//! The radial operator F(u) = −(Δ − W″(u))(Δu − W′(u)) and its first two variations,
//! evaluated pointwise from derivative jets.

use crate::error::Result;
use crate::jet::Jet;
use crate::potential::Potential;

use super::field::RadialField;

/// (n−1, (n−1)(n−3)).
fn coeffs(n: usize) -> (f64, f64) {
    let m = n as f64 - 1.0;
    (m, m * (n as f64 - 3.0))
}

/// F at radius r from the jet of u.
pub fn f_point(pot: &Potential, n: usize, r: f64, u: &Jet) -> Result<f64> {
    let (m, c) = coeffs(n);
    let [_, w1, w2, w3, _] = pot.derivs(u.v())?;
    let [_, u1, u2, u3, u4] = u.0;
    Ok(-u4 - 2.0 * m / r * u3 + (2.0 * w2 - c / (r * r)) * u2 + (2.0 * m * w2 / r + c / (r * r * r)) * u1 + w3 * u1 * u1
        - w1 * w2)
}

/// F′(u)[φ] at radius r.
pub fn fprime_point(pot: &Potential, n: usize, r: f64, u: &Jet, phi: &Jet) -> Result<f64> {
    let (m, c) = coeffs(n);
    let [_, w1, w2, w3, w4] = pot.derivs(u.v())?;
    let [_, u1, u2, _, _] = u.0;
    let [p0, p1, p2, p3, p4] = phi.0;
    Ok(-p4 - 2.0 * m / r * p3 + (2.0 * w2 - c / (r * r)) * p2 - w2 * w2 * p0
        + (2.0 * m * w2 / r + c / (r * r * r)) * p1
        + 2.0 * w3 * p1 * u1
        - w3 * w1 * p0
        + w4 * u1 * u1 * p0
        + 2.0 * w3 * u2 * p0
        + 2.0 * m / r * w3 * u1 * p0)
}

/// F″(u)[v₁, v₂] at radius r: the full second variation (so the Taylor term is ½F″).
pub fn fsecond_point(pot: &Potential, n: usize, r: f64, u: &Jet, v1: &Jet, v2: &Jet) -> Result<f64> {
    let [_, w1, w2, w3, w4] = pot.derivs(u.v())?;
    let w5 = pot.fifth(u.v())?;
    let a = u.compose([w3, w4, w5, 0.0, 0.0]) * *v1 * *v2;
    let lap_a = a.laplacian(n, r);
    let lap_u = u.laplacian(n, r);
    let (p, q) = (v1.v(), v2.v());
    Ok(lap_a - (w3 * w2 + w4 * (-lap_u + w1)) * p * q
        + w3 * ((v1.laplacian(n, r) - w2 * p) * q + (v2.laplacian(n, r) - w2 * q) * p))
}

fn map_nodes(
    u: &RadialField,
    mut f: impl FnMut(usize, f64) -> Result<f64>,
) -> Result<RadialField> {
    let mut out = u.zeros_like();
    for i in 1..u.values.len() {
        out.values[i] = f(i, u.r(i))?;
    }
    Ok(out)
}

/// F(u) on the grid with stencil derivatives; the origin node is left at 0.
pub fn apply_f(pot: &Potential, u: &RadialField, n: usize) -> Result<RadialField> {
    let ju = u.jets();
    map_nodes(u, |i, r| f_point(pot, n, r, &ju[i]))
}

pub fn apply_fprime(pot: &Potential, z: &RadialField, phi: &RadialField, n: usize) -> Result<RadialField> {
    z.check_aligned(phi)?;
    let (jz, jp) = (z.jets(), phi.jets());
    map_nodes(z, |i, r| fprime_point(pot, n, r, &jz[i], &jp[i]))
}

pub fn apply_fsecond(
    pot: &Potential,
    u: &RadialField,
    v1: &RadialField,
    v2: &RadialField,
    n: usize,
) -> Result<RadialField> {
    u.check_aligned(v1)?;
    u.check_aligned(v2)?;
    let (ju, j1, j2) = (u.jets(), v1.jets(), v2.jets());
    map_nodes(u, |i, r| fsecond_point(pot, n, r, &ju[i], &j1[i], &j2[i]))
}

/// N(φ) = F(z+φ) − F(z) − F′(z)[φ] by direct evaluation.
pub fn nonlinear_n(pot: &Potential, z: &RadialField, phi: &RadialField, n: usize) -> Result<RadialField> {
    z.check_aligned(phi)?;
    let (jz, jp) = (z.jets(), phi.jets());
    map_nodes(z, |i, r| {
        Ok(f_point(pot, n, r, &(jz[i] + jp[i]))? - f_point(pot, n, r, &jz[i])? - fprime_point(pot, n, r, &jz[i], &jp[i])?)
    })
}

/// ½∫(Δu − W′(u))² r^{n−1} dr · |S^{n−1}| by the trapezoid rule on the nodes.
pub fn diffuse_energy(pot: &Potential, u: &RadialField, n: usize) -> Result<f64> {
    let ju = u.jets();
    let mut sum = 0.0;
    let last = u.values.len() - 1;
    for (i, j) in ju.iter().enumerate() {
        let r = u.r(i);
        let lap = if i == 0 { n as f64 * j.d(2) } else { j.laplacian(n, r) };
        let g = lap - pot.eval(j.v(), 1)?;
        let w = if i == 0 || i == last { 0.5 } else { 1.0 };
        sum += w * g * g * r.powi(n as i32 - 1);
    }
    Ok(0.5 * sum * u.dx * crate::special::sphere_area(n))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::layer::build_layer;
    use rand::{Rng, SeedableRng};

    fn bump(r: f64) -> f64 {
        (-(r - 6.0).powi(2)).exp()
    }

    #[test]
    fn constant_states_and_linearization_at_one() {
        let pot = Potential::Quartic;
        let one = RadialField::from_fn(0.02, 600, |_| 1.0);
        assert!(apply_f(&pot, &one, 4).unwrap().max_abs() < 1e-15);
        let phi = RadialField::from_fn(0.02, 600, bump);
        let lin = apply_fprime(&pot, &one, &phi, 4).unwrap();
        // F′(1)[φ] = −Δ²φ + 2W″(1)Δφ − W″(1)²φ
        let jp = phi.jets();
        for i in [100, 300, 450] {
            let r = phi.r(i);
            let j = jp[i];
            let lap = j.laplacian(4, r);
            let lj = j.laplacian_jet(4, r);
            let bilap = lj[2] + 3.0 / r * lj[1];
            let expect = -bilap + 4.0 * lap - 4.0 * j.v();
            assert!((lin.values[i] - expect).abs() < 1e-9, "{} vs {}", lin.values[i], expect);
        }
    }

    #[test]
    fn variations_match_difference_quotients() {
        let layer = build_layer(&Potential::Quartic, 25.0, 1e-2).unwrap();
        let pot = Potential::Quartic;
        let z = RadialField::from_fn(0.02, 800, |r| layer.eval(r - 8.0)[0]);
        let phi = RadialField::from_fn(0.02, 800, bump);
        let jz = z.jets();
        let jp = phi.jets();
        let mut errs = vec![];
        for eps in [1e-3, 5e-4] {
            let mut e = 0.0f64;
            for i in 50..800 {
                let r = z.r(i);
                let fd = (f_point(&pot, 4, r, &(jz[i] + jp[i].scale(eps))).unwrap() - f_point(&pot, 4, r, &jz[i]).unwrap()) / eps;
                e = e.max((fd - fprime_point(&pot, 4, r, &jz[i], &jp[i]).unwrap()).abs());
            }
            errs.push(e);
        }
        assert!((errs[0] / errs[1] - 2.0).abs() < 0.1, "{errs:?}");
        // Taylor remainder with ½F″ is cubic
        let mut rem = vec![];
        for eps in [1e-2, 5e-3] {
            let mut e = 0.0f64;
            for i in 50..800 {
                let r = z.r(i);
                let v = jp[i].scale(eps);
                let t = f_point(&pot, 4, r, &(jz[i] + v)).unwrap()
                    - f_point(&pot, 4, r, &jz[i]).unwrap()
                    - fprime_point(&pot, 4, r, &jz[i], &v).unwrap()
                    - 0.5 * fsecond_point(&pot, 4, r, &jz[i], &v, &v).unwrap();
                e = e.max(t.abs());
            }
            rem.push(e);
        }
        assert!((rem[0] / rem[1] - 8.0).abs() < 0.5, "{rem:?}");
    }

    #[test]
    fn second_variation_is_symmetric() {
        let pot = Potential::cosine();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let r = rng.gen_range(0.5..20.0);
            let u = Jet([0.0; 5].map(|_| rng.gen_range(-1.0..1.0)));
            let a = Jet([0.0; 5].map(|_| rng.gen_range(-1.0..1.0)));
            let b = Jet([0.0; 5].map(|_| rng.gen_range(-1.0..1.0)));
            let x = fsecond_point(&pot, 5, r, &u, &a, &b).unwrap();
            let y = fsecond_point(&pot, 5, r, &u, &b, &a).unwrap();
            assert!((x - y).abs() < 1e-12);
            assert_eq!(fsecond_point(&pot, 5, r, &u, &a, &Jet::ZERO).unwrap(), 0.0);
        }
    }
}

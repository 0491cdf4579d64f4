//! Coercivity of ∫|φ″ − W″(ω)φ|² on the orthogonal complement of ω′: the smallest
//! eigenvalue of (−∂yy + W″(ω))² restricted to {φ ⊥ ω′}, Dirichlet at ±Y.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::layer::LayerTable;

const MAX_ITER: usize = 500;
const EIGEN_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Serialize)]
pub struct SpectralGap {
    pub y_max: f64,
    pub step: f64,
    /// Smallest eigenvalue of the projected quadratic form.
    pub eigenvalue: f64,
    /// ‖P A x − λx‖ for the computed unit eigenvector x.
    pub residual: f64,
    /// |⟨x, ω′⟩| / ‖ω′‖.
    pub orthogonality: f64,
    pub iterations: usize,
    /// sup |−ω‴ + W″(ω)ω′| with ω‴ by finite differences of ω′.
    pub translation_residual: f64,
    pub positive: bool,
}

/// Second-order finite-difference L = −∂yy + W″(ω) on the interior nodes of [−Y, Y], and
/// the normalized translation mode sampled there.
pub fn discretize(layer: &LayerTable, y_max: f64, step: f64) -> Result<(DMatrix<f64>, DVector<f64>)> {
    let m = (2.0 * y_max / step).round() as usize;
    if m < 8 || ((m as f64) * step - 2.0 * y_max).abs() > 1e-9 * y_max {
        return Err(Error::Argument(format!("step {step} must divide 2Y = {}", 2.0 * y_max)));
    }
    let pot = layer.potential();
    let dim = m - 1;
    let mut l = DMatrix::zeros(dim, dim);
    let mut v = DVector::zeros(dim);
    let inv = 1.0 / (step * step);
    for i in 0..dim {
        let y = -y_max + (i + 1) as f64 * step;
        let w = layer.eval(y);
        l[(i, i)] = 2.0 * inv + pot.eval(w[0], 2)?;
        if i > 0 {
            l[(i, i - 1)] = -inv;
        }
        if i + 1 < dim {
            l[(i, i + 1)] = -inv;
        }
        v[i] = w[1];
    }
    let norm = v.norm();
    Ok((l, v / norm))
}

fn translation_residual(layer: &LayerTable, y_max: f64) -> Result<f64> {
    // sixth-order second difference of ω′
    const C: [f64; 4] = [-49.0 / 18.0, 3.0 / 2.0, -3.0 / 20.0, 1.0 / 90.0];
    let h = 0.02;
    let pot = layer.potential();
    let mut worst = 0.0f64;
    let count = (y_max / h).floor() as i64 - 3;
    for k in -count..=count {
        let y = k as f64 * h;
        let mut d2 = C[0] * layer.eval(y)[1];
        for (j, c) in C.iter().enumerate().skip(1) {
            let s = j as f64 * h;
            d2 += c * (layer.eval(y + s)[1] + layer.eval(y - s)[1]);
        }
        d2 /= h * h;
        let w = layer.eval(y);
        worst = worst.max((-d2 + pot.eval(w[0], 2)? * w[1]).abs());
    }
    Ok(worst)
}

/// Inverse iteration on the bordered system [A v; vᵀ 0][x; μ] = [b; 0], A = L², which solves
/// P A x = b on the complement of v without ever inverting the near-singular A.
pub fn spectral_gap(layer: &LayerTable, y_max: f64, step: f64) -> Result<SpectralGap> {
    if y_max < 20.0 {
        return Err(Error::Argument(format!("truncation Y = {y_max} must be ≥ 20")));
    }
    let (l, v) = discretize(layer, y_max, step)?;
    let dim = v.len();
    let a = &l * &l;
    let mut bordered = DMatrix::zeros(dim + 1, dim + 1);
    bordered.view_mut((0, 0), (dim, dim)).copy_from(&a);
    bordered.view_mut((0, dim), (dim, 1)).copy_from(&v);
    bordered.view_mut((dim, 0), (1, dim)).copy_from(&v.transpose());
    let lu = bordered.lu();

    let project = |x: &DVector<f64>| x - &v * v.dot(x);
    // generic start with both parities
    let mut x = project(&DVector::from_fn(dim, |i, _| {
        let y = -y_max + (i + 1) as f64 * step;
        (1.0 + 0.3 * y) * (-y * y / 50.0).exp()
    }));
    x /= x.norm();
    let mut lambda = f64::NAN;
    for it in 1..=MAX_ITER {
        let mut rhs = DVector::zeros(dim + 1);
        rhs.rows_mut(0, dim).copy_from(&x);
        let sol = lu
            .solve(&rhs)
            .ok_or_else(|| Error::Numerical("bordered eigen system is singular".into()))?;
        let mut y = project(&sol.rows(0, dim).into_owned());
        y /= y.norm();
        let ay = &a * &y;
        let next = y.dot(&ay);
        let residual = project(&ay) - &y * next;
        let done = (next - lambda).abs() <= EIGEN_TOL * next.abs() && residual.norm() < 1e-6 * next.abs();
        lambda = next;
        x = y;
        if done {
            return Ok(SpectralGap {
                y_max,
                step,
                eigenvalue: lambda,
                residual: residual.norm(),
                orthogonality: v.dot(&x).abs(),
                iterations: it,
                translation_residual: translation_residual(layer, y_max)?,
                positive: lambda > 0.0,
            });
        }
    }
    Err(Error::Numerical(format!("inverse iteration did not converge in {MAX_ITER} steps (λ ≈ {lambda})")))
}

/// Independent check of `spectral_gap`: the smallest eigenvalue of QᵀAQ, Q an orthonormal
/// basis of v⊥, from a full symmetric eigendecomposition.
pub fn dense_projected_minimum(layer: &LayerTable, y_max: f64, step: f64) -> Result<f64> {
    let (l, v) = discretize(layer, y_max, step)?;
    let dim = v.len();
    let mut basis = DMatrix::zeros(dim, dim);
    basis.set_column(0, &v);
    for j in 1..dim {
        basis[(j, j)] = 1.0;
    }
    let q = basis.qr().q();
    let comp = q.columns(1, dim - 1);
    let reduced = comp.transpose() * (&l * &l) * comp;
    Ok(reduced.symmetric_eigenvalues().min())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::layer::build_layer;
    use crate::potential::Potential;

    #[test]
    fn quartic_gap_matches_dense_oracle() {
        let layer = build_layer(&Potential::Quartic, 25.0, 1e-2).unwrap();
        let coarse = spectral_gap(&layer, 20.0, 0.1).unwrap();
        let fine = spectral_gap(&layer, 20.0, 0.05).unwrap();
        for g in [&coarse, &fine] {
            assert!(((g.eigenvalue - 2.25) / 2.25).abs() < 0.05, "{g:?}");
            assert!(g.positive && g.orthogonality < 1e-10);
            assert!(g.translation_residual < 1e-8, "{}", g.translation_residual);
        }
        let oc = dense_projected_minimum(&layer, 20.0, 0.1).unwrap();
        let of = dense_projected_minimum(&layer, 20.0, 0.05).unwrap();
        assert!((coarse.eigenvalue - oc).abs() < 1e-8 * oc, "{} {oc}", coarse.eigenvalue);
        assert!((fine.eigenvalue - of).abs() < 1e-8 * of);
        // second-order convergence: Richardson extrapolation lands on 9/4
        let rich = (4.0 * of - oc) / 3.0;
        assert!((rich - 2.25).abs() < (of - 2.25).abs(), "{oc} {of} {rich}");
    }

    #[test]
    fn cosine_gap_is_positive() {
        let layer = build_layer(&Potential::cosine(), 25.0, 1e-2).unwrap();
        let g = spectral_gap(&layer, 20.0, 0.1).unwrap();
        assert!(g.eigenvalue > 0.5, "{g:?}");
        assert!(spectral_gap(&layer, 10.0, 0.1).is_err());
    }
}

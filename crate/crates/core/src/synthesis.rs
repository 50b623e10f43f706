//! Parametric gain design: given a parameter matrix Z and a target matrix F,
//! produce the high-order feedback row whose block-companion closed loop is
//! similar to F, plus verification of the assigned spectrum.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Relative conditioning floor on |det V|: designs below
/// `floor = V_CONDITIONING_FLOOR * prod(row norms)` are rejected.
pub const V_CONDITIONING_FLOOR: f64 = 1e-12;

/// A (Z, F) parameter pair for one subsystem of order `order` with `channels`
/// input channels.
#[derive(Debug, Clone, PartialEq)]
pub struct ParametricDesign {
    z: DMatrix<f64>,
    f: DMatrix<f64>,
    order: usize,
    channels: usize,
}

impl ParametricDesign {
    /// `z` must be channels x (order * channels), `f` square of the same width.
    pub fn new(z: DMatrix<f64>, f: DMatrix<f64>, order: usize) -> Result<Self> {
        if order == 0 {
            return Err(Error::InvalidArgument("order must be >= 1".into()));
        }
        let channels = z.nrows();
        if channels == 0 {
            return Err(Error::InvalidArgument("Z must have at least one row".into()));
        }
        let n = order * channels;
        if z.ncols() != n {
            return Err(Error::InvalidArgument(format!(
                "Z must be {channels} x {n} for order {order}, got {channels} x {}",
                z.ncols()
            )));
        }
        if f.nrows() != n || f.ncols() != n {
            return Err(Error::InvalidArgument(format!(
                "F must be {n} x {n}, got {} x {}",
                f.nrows(),
                f.ncols()
            )));
        }
        Ok(Self {
            z,
            f,
            order,
            channels,
        })
    }

    /// Single-channel design: a row parameter vector and a real diagonal F.
    pub fn scalar(z_row: &[f64], f_diag: &[f64]) -> Result<Self> {
        if z_row.len() != f_diag.len() {
            return Err(Error::InvalidArgument(format!(
                "Z row and F diagonal must have equal length, got {} and {}",
                z_row.len(),
                f_diag.len()
            )));
        }
        let order = z_row.len();
        Self::new(
            DMatrix::from_row_slice(1, order, z_row),
            DMatrix::from_diagonal(&nalgebra::DVector::from_row_slice(f_diag)),
            order,
        )
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn z(&self) -> &DMatrix<f64> {
        &self.z
    }

    pub fn f(&self) -> &DMatrix<f64> {
        &self.f
    }
}

/// Synthesized feedback row with the design that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct GainRow {
    /// channels x (order * channels) coefficient block row, lowest derivative
    /// order first.
    pub coeffs: DMatrix<f64>,
    pub design: ParametricDesign,
}

impl GainRow {
    /// Coefficients of the single-channel case as a plain slice.
    pub fn as_row(&self) -> &[f64] {
        self.coeffs.as_slice()
    }
}

/// Stacked observability-style parameter matrix [Z; ZF; ...; ZF^(order-1)].
pub fn build_parameter_stack(design: &ParametricDesign) -> DMatrix<f64> {
    let n = design.order * design.channels;
    let mut v = DMatrix::zeros(n, n);
    let mut block = design.z.clone();
    for k in 0..design.order {
        v.rows_mut(k * design.channels, design.channels)
            .copy_from(&block);
        if k + 1 < design.order {
            block = &block * &design.f;
        }
    }
    v
}

/// Computes the feedback row `-Z F^order V^(-1)`.
///
/// Rejects parameterizations whose stacked matrix falls below the
/// conditioning floor (|det V| measured against the Hadamard bound).
pub fn synthesize_gains(design: &ParametricDesign) -> Result<GainRow> {
    let v = build_parameter_stack(design);
    let det = v.clone().lu().determinant();
    let hadamard: f64 = v
        .row_iter()
        .map(|row| row.norm())
        .product::<f64>()
        .max(f64::MIN_POSITIVE);
    let floor = V_CONDITIONING_FLOOR * hadamard;
    if det.abs() < floor {
        return Err(Error::SingularParameterization {
            det,
            floor,
            z: design.z.as_slice().to_vec(),
            f: design.f.diagonal().as_slice().to_vec(),
        });
    }

    let mut zfm = design.z.clone();
    for _ in 0..design.order {
        zfm = &zfm * &design.f;
    }
    // coeffs * V = -Z F^m  <=>  V^T coeffs^T = -(Z F^m)^T
    let rhs = -zfm.transpose();
    let coeffs_t = v
        .transpose()
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::SingularParameterization {
            det,
            floor,
            z: design.z.as_slice().to_vec(),
            f: design.f.diagonal().as_slice().to_vec(),
        })?;
    Ok(GainRow {
        coeffs: coeffs_t.transpose(),
        design: design.clone(),
    })
}

/// Block-companion realization of the closed loop `x^(m) + A x^(0..m-1) = 0`:
/// identity blocks above the diagonal, negated coefficients in the last block
/// row.
pub fn companion(gains: &GainRow) -> DMatrix<f64> {
    companion_blocks(&gains.coeffs, gains.design.order, gains.design.channels)
}

/// Companion matrix for a single-channel coefficient row.
pub fn companion_from_row(row: &[f64]) -> DMatrix<f64> {
    companion_blocks(
        &DMatrix::from_row_slice(1, row.len(), row),
        row.len(),
        1,
    )
}

fn companion_blocks(coeffs: &DMatrix<f64>, order: usize, channels: usize) -> DMatrix<f64> {
    let n = order * channels;
    let mut m = DMatrix::zeros(n, n);
    for k in 0..(order - 1) {
        for i in 0..channels {
            m[(k * channels + i, (k + 1) * channels + i)] = 1.0;
        }
    }
    for i in 0..channels {
        for j in 0..n {
            m[((order - 1) * channels + i, j)] = -coeffs[(i, j)];
        }
    }
    m
}

/// Largest distance between the closed-loop spectrum of `gains` and the
/// diagonal of the requested F (matched as multisets).
///
/// Supported for single-channel rows, where the companion spectrum is exactly
/// the root set of the monic polynomial with ascending coefficients
/// [A_0, ..., A_(m-1), 1]; multi-channel designs are assembled per channel
/// upstream.
pub fn verify_spectrum(gains: &GainRow, f_diag: &[f64]) -> Result<f64> {
    if gains.design.channels != 1 {
        return Err(Error::Unsupported(
            "spectrum verification is defined per scalar channel".into(),
        ));
    }
    if f_diag.len() != gains.design.order {
        return Err(Error::InvalidArgument(format!(
            "F diagonal length {} does not match order {}",
            f_diag.len(),
            gains.design.order
        )));
    }
    let roots = polynomial_roots(gains.as_row());
    let targets: Vec<Complex64> = f_diag.iter().map(|&f| Complex64::new(f, 0.0)).collect();
    Ok(multiset_distance(&roots, &targets))
}

/// Roots of the monic polynomial s^m + a_(m-1) s^(m-1) + ... + a_0 given the
/// ascending coefficients [a_0, ..., a_(m-1)], by Durand-Kerner iteration.
fn polynomial_roots(ascending: &[f64]) -> Vec<Complex64> {
    let m = ascending.len();
    if m == 0 {
        return Vec::new();
    }
    if m == 1 {
        return vec![Complex64::new(-ascending[0], 0.0)];
    }

    let eval = |z: Complex64| -> Complex64 {
        let mut acc = Complex64::new(1.0, 0.0);
        for &a in ascending.iter().rev() {
            acc = acc * z + a;
        }
        acc
    };

    // Cauchy bound keeps all roots inside |z| <= radius.
    let radius = 1.0 + ascending.iter().fold(0.0f64, |acc, a| acc.max(a.abs()));
    let seed = Complex64::new(0.4, 0.9);
    let mut roots: Vec<Complex64> = (0..m)
        .map(|k| seed.powu(k as u32 + 1) * radius)
        .collect();

    let tolerance = 1e-14 * radius.max(1.0);
    for _ in 0..500 {
        let mut max_step = 0.0f64;
        for i in 0..m {
            let mut denom = Complex64::new(1.0, 0.0);
            for j in 0..m {
                if j != i {
                    denom *= roots[i] - roots[j];
                }
            }
            let step = eval(roots[i]) / denom;
            roots[i] -= step;
            max_step = max_step.max(step.norm());
        }
        if max_step < tolerance {
            break;
        }
    }
    roots
}

/// Smallest over all pairings of the largest root-to-target distance.
fn multiset_distance(roots: &[Complex64], targets: &[Complex64]) -> f64 {
    assert_eq!(roots.len(), targets.len());
    let n = roots.len();
    let mut used = vec![false; n];
    fn recurse(
        roots: &[Complex64],
        targets: &[Complex64],
        used: &mut [bool],
        depth: usize,
        current_max: f64,
        best: &mut f64,
    ) {
        if current_max >= *best {
            return;
        }
        if depth == targets.len() {
            *best = current_max;
            return;
        }
        for i in 0..roots.len() {
            if !used[i] {
                used[i] = true;
                let d = (roots[i] - targets[depth]).norm();
                recurse(roots, targets, used, depth + 1, current_max.max(d), best);
                used[i] = false;
            }
        }
    }
    let mut best = f64::INFINITY;
    recurse(roots, targets, &mut used, 0, 0.0, &mut best);
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn altitude_design() -> ParametricDesign {
        ParametricDesign::scalar(&[1.0, 1.0], &[-4.0, -5.0]).unwrap()
    }

    fn lateral_design() -> ParametricDesign {
        ParametricDesign::scalar(&[1.0, 1.0, 1.0, 1.0], &[-5.0, -6.0, -7.0, -8.0]).unwrap()
    }

    #[test]
    fn parameter_stack_second_order() {
        let v = build_parameter_stack(&altitude_design());
        assert_eq!(v, DMatrix::from_row_slice(2, 2, &[1.0, 1.0, -4.0, -5.0]));
        assert_relative_eq!(v.lu().determinant(), -1.0, epsilon = 1e-15);
    }

    #[test]
    fn parameter_stack_first_order_is_z() {
        let d = ParametricDesign::scalar(&[3.0], &[-2.0]).unwrap();
        assert_eq!(build_parameter_stack(&d), DMatrix::from_row_slice(1, 1, &[3.0]));
    }

    #[test]
    fn parameter_stack_fourth_order_is_vandermonde() {
        let v = build_parameter_stack(&lateral_design());
        for (k, row) in v.row_iter().enumerate() {
            for (j, &node) in [-5.0f64, -6.0, -7.0, -8.0].iter().enumerate() {
                assert_relative_eq!(row[j], node.powi(k as i32), epsilon = 1e-12);
            }
        }
        assert!(v.lu().determinant().abs() > 0.0);
    }

    #[test]
    fn gains_for_two_pole_design() {
        let gains = synthesize_gains(&altitude_design()).unwrap();
        assert_relative_eq!(gains.as_row()[0], 20.0, epsilon = 1e-9);
        assert_relative_eq!(gains.as_row()[1], 9.0, epsilon = 1e-9);
    }

    #[test]
    fn gains_for_four_pole_design() {
        let gains = synthesize_gains(&lateral_design()).unwrap();
        let expected = [1680.0, 1066.0, 251.0, 26.0];
        for (got, want) in gains.as_row().iter().zip(expected) {
            assert_relative_eq!(*got, want, epsilon = 1e-9);
        }
    }

    #[test]
    fn repeated_nodes_with_flat_z_are_rejected() {
        let design = ParametricDesign::scalar(&[1.0, 1.0], &[-1.0, -1.0]).unwrap();
        let err = synthesize_gains(&design).unwrap_err();
        assert!(matches!(err, Error::SingularParameterization { .. }));
    }

    #[test]
    fn companion_of_two_pole_row() {
        let gains = synthesize_gains(&altitude_design()).unwrap();
        let c = companion(&gains);
        let expected = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -20.0, -9.0]);
        assert_relative_eq!(c, expected, epsilon = 1e-9);
    }

    #[test]
    fn companion_of_zero_row_is_shift() {
        let c = companion_from_row(&[0.0, 0.0]);
        assert_eq!(c, DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 0.0, 0.0]));
    }

    #[test]
    fn companion_of_four_pole_row() {
        let c = companion_from_row(&[1680.0, 1066.0, 251.0, 26.0]);
        assert_eq!(c.nrows(), 4);
        for j in 0..3 {
            assert_eq!(c[(j, j + 1)], 1.0);
        }
        assert_eq!(
            c.row(3).iter().copied().collect::<Vec<_>>(),
            vec![-1680.0, -1066.0, -251.0, -26.0]
        );
    }

    #[test]
    fn spectrum_matches_requested_poles() {
        let gains = synthesize_gains(&altitude_design()).unwrap();
        assert!(verify_spectrum(&gains, &[-4.0, -5.0]).unwrap() < 1e-9);

        let gains = synthesize_gains(&lateral_design()).unwrap();
        assert!(verify_spectrum(&gains, &[-5.0, -6.0, -7.0, -8.0]).unwrap() < 1e-8);
    }

    #[test]
    fn spectrum_mismatch_is_reported_for_perturbed_row() {
        let gains = synthesize_gains(&altitude_design()).unwrap();
        let mut perturbed = gains.clone();
        perturbed.coeffs[(0, 0)] += 1.0;
        let mismatch = verify_spectrum(&perturbed, &[-4.0, -5.0]).unwrap();
        assert!(mismatch > 1e-3, "mismatch {mismatch}");
    }

    #[test]
    fn companion_is_similar_to_target() {
        for design in [altitude_design(), lateral_design()] {
            let gains = synthesize_gains(&design).unwrap();
            let v = build_parameter_stack(&design);
            let x_t = v
                .transpose()
                .lu()
                .solve(&(&v * design.f()).transpose())
                .unwrap();
            let similar = x_t.transpose();
            let residual = (companion(&gains) - similar).abs().max();
            assert!(residual < 1e-9, "residual {residual}");
        }
    }

    #[test]
    fn gains_are_scale_invariant_in_z() {
        let base = synthesize_gains(&altitude_design()).unwrap();
        for c in [-3.0, 0.25, 17.0] {
            let design = ParametricDesign::scalar(&[c, c], &[-4.0, -5.0]).unwrap();
            let scaled = synthesize_gains(&design).unwrap();
            for (a, b) in scaled.as_row().iter().zip(base.as_row()) {
                assert_relative_eq!(a, b, epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn characteristic_coefficients_match_pole_product() {
        // Expand prod(s - f_i) independently and compare with the gain row.
        let expand = |poles: &[f64]| -> Vec<f64> {
            let mut coeffs = vec![1.0];
            for &p in poles {
                let mut next = vec![0.0; coeffs.len() + 1];
                for (k, &c) in coeffs.iter().enumerate() {
                    next[k + 1] += c;
                    next[k] += -p * c;
                }
                coeffs = next;
            }
            coeffs
        };
        for (z, poles) in [
            (vec![1.0, 1.0], vec![-4.0, -5.0]),
            (vec![1.0, 1.0, 1.0, 1.0], vec![-5.0, -6.0, -7.0, -8.0]),
        ] {
            let design = ParametricDesign::scalar(&z, &poles).unwrap();
            let gains = synthesize_gains(&design).unwrap();
            let coeffs = expand(&poles);
            assert_relative_eq!(*coeffs.last().unwrap(), 1.0);
            for (k, got) in gains.as_row().iter().enumerate() {
                assert_relative_eq!(*got, coeffs[k], epsilon = 1e-9);
            }
        }
    }
}

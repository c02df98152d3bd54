//! Compressible Neo-Hooke material model in 2D.

use crate::error::{Error, Result};

/// Elastic material constants.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MaterialParams {
    /// Young's modulus in Pa.
    pub youngs_modulus: f64,
    /// Poisson ratio.
    pub poisson_ratio: f64,
    /// Denominator convention of the shear coefficient: `mu = E / (d (1 + nu))`
    /// with `d = 2` for the standard shear modulus. `d = 1` is kept selectable
    /// for comparison runs.
    pub mu_denominator: u8,
}

impl MaterialParams {
    pub fn new(youngs_modulus: f64, poisson_ratio: f64) -> Result<Self> {
        Self::with_mu_denominator(youngs_modulus, poisson_ratio, 2)
    }

    pub fn with_mu_denominator(
        youngs_modulus: f64,
        poisson_ratio: f64,
        mu_denominator: u8,
    ) -> Result<Self> {
        if !(youngs_modulus > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "Young's modulus must be positive, got {youngs_modulus}"
            )));
        }
        if !(0.0..0.5).contains(&poisson_ratio) {
            return Err(Error::InvalidArgument(format!(
                "Poisson ratio must be in [0, 0.5), got {poisson_ratio}"
            )));
        }
        if mu_denominator != 1 && mu_denominator != 2 {
            return Err(Error::InvalidArgument(format!(
                "mu denominator must be 1 or 2, got {mu_denominator}"
            )));
        }
        Ok(MaterialParams {
            youngs_modulus,
            poisson_ratio,
            mu_denominator,
        })
    }

    pub fn mu(&self) -> f64 {
        self.youngs_modulus / (self.mu_denominator as f64 * (1.0 + self.poisson_ratio))
    }

    pub fn lambda(&self) -> f64 {
        self.youngs_modulus * self.poisson_ratio
            / ((1.0 + self.poisson_ratio) * (1.0 - 2.0 * self.poisson_ratio))
    }
}

fn det2(f: [[f64; 2]; 2]) -> f64 {
    f[0][0] * f[1][1] - f[0][1] * f[1][0]
}

fn inv2(f: [[f64; 2]; 2], det: f64) -> [[f64; 2]; 2] {
    [
        [f[1][1] / det, -f[0][1] / det],
        [-f[1][0] / det, f[0][0] / det],
    ]
}

/// First Piola-Kirchhoff stress
/// `P(F) = mu (F - F^{-T}) + lambda ln(det F) F^{-T}`.
pub fn first_piola(f: [[f64; 2]; 2], mat: &MaterialParams) -> Result<[[f64; 2]; 2]> {
    let det = det2(f);
    if det <= 0.0 {
        return Err(Error::NonPhysicalDeformation { element: None });
    }
    let finv = inv2(f, det);
    let (mu, lambda) = (mat.mu(), mat.lambda());
    let ln_det = det.ln();
    let mut p = [[0.0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            let finv_t = finv[j][i];
            p[i][j] = mu * (f[i][j] - finv_t) + lambda * ln_det * finv_t;
        }
    }
    Ok(p)
}

/// Derivative `A = dP/dF` as a 4x4 matrix indexed `[2i+j][2k+l]` for
/// `A[P_ij, F_kl]`, using
/// `d(F^{-T})_ij/dF_kl = -F^{-1}_jk F^{-1}_li` and
/// `d(ln det F)/dF_kl = F^{-1}_lk`.
pub fn piola_tangent(f: [[f64; 2]; 2], mat: &MaterialParams) -> Result<[[f64; 4]; 4]> {
    let det = det2(f);
    if det <= 0.0 {
        return Err(Error::NonPhysicalDeformation { element: None });
    }
    let finv = inv2(f, det);
    let (mu, lambda) = (mat.mu(), mat.lambda());
    let ln_det = det.ln();
    let mut a = [[0.0; 4]; 4];
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                for l in 0..2 {
                    let delta = if i == k && j == l { 1.0 } else { 0.0 };
                    let dfinv_t = -finv[j][k] * finv[l][i];
                    a[2 * i + j][2 * k + l] = mu * (delta - dfinv_t)
                        + lambda * (finv[l][k] * finv[j][i] + ln_det * dfinv_t);
                }
            }
        }
    }
    Ok(a)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn mat() -> MaterialParams {
        MaterialParams::new(210e9, 0.3).unwrap()
    }

    #[test]
    fn material_invariants() {
        assert!(MaterialParams::new(-1.0, 0.3).is_err());
        assert!(MaterialParams::new(1.0, 0.5).is_err());
        assert!(MaterialParams::with_mu_denominator(1.0, 0.3, 3).is_err());
        let m = mat();
        assert!((m.mu() - 210e9 / 2.6).abs() < 1.0);
        assert!((m.lambda() - 210e9 * 0.3 / (1.3 * 0.4)).abs() < 1.0);
        let m1 = MaterialParams::with_mu_denominator(210e9, 0.3, 1).unwrap();
        assert!((m1.mu() - 2.0 * m.mu()).abs() < 1.0);
    }

    #[test]
    fn identity_is_stress_free() {
        let p = first_piola([[1.0, 0.0], [0.0, 1.0]], &mat()).unwrap();
        for row in p {
            for v in row {
                assert_eq!(v, 0.0);
            }
        }
    }

    #[test]
    fn isochoric_diagonal_closed_form() {
        // F = diag(a, 1/a): det F = 1, so P = mu diag(a - 1/a, 1/a - a)
        let a = 1.3;
        let m = mat();
        let p = first_piola([[a, 0.0], [0.0, 1.0 / a]], &m).unwrap();
        assert!((p[0][0] - m.mu() * (a - 1.0 / a)).abs() <= 1e-12 * m.mu());
        assert!((p[1][1] - m.mu() * (1.0 / a - a)).abs() <= 1e-12 * m.mu());
        assert_eq!(p[0][1], 0.0);
        assert_eq!(p[1][0], 0.0);
    }

    #[test]
    fn stretch_matches_direct_formula_evaluation() {
        // Oracle: the stress formula evaluated step by step with explicitly
        // written-out inverse/transpose/log, independent of first_piola.
        let f = [[1.1, 0.0], [0.0, 1.0]];
        let e = 210e9;
        let nu = 0.3;
        let mu = e / (2.0 * (1.0 + nu));
        let lambda = e * nu / ((1.0 + nu) * (1.0 - 2.0 * nu));
        let det = 1.1 * 1.0 - 0.0;
        let f_inv_t = [[1.0 / 1.1, 0.0], [0.0, 1.0]];
        let mut expected = [[0.0; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                expected[i][j] = mu * (f[i][j] - f_inv_t[i][j]) + lambda * det.ln() * f_inv_t[i][j];
            }
        }
        let p = first_piola(f, &mat()).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                let scale = expected[i][j].abs().max(1.0);
                assert!((p[i][j] - expected[i][j]).abs() <= 1e-12 * scale);
            }
        }
    }

    #[test]
    fn inverted_deformation_rejected() {
        assert!(matches!(
            first_piola([[-1.0, 0.0], [0.0, 1.0]], &mat()),
            Err(Error::NonPhysicalDeformation { .. })
        ));
        assert!(piola_tangent([[0.0, 0.0], [0.0, 0.0]], &mat()).is_err());
    }

    #[test]
    fn tangent_at_identity_is_linear_elasticity() {
        let m = mat();
        let a = piola_tangent([[1.0, 0.0], [0.0, 1.0]], &m).unwrap();
        let (mu, lambda) = (m.mu(), m.lambda());
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    for l in 0..2 {
                        let d = |p: usize, q: usize| if p == q { 1.0 } else { 0.0 };
                        let expected =
                            mu * (d(i, k) * d(j, l) + d(i, l) * d(j, k)) + lambda * d(i, j) * d(k, l);
                        let got = a[2 * i + j][2 * k + l];
                        assert!(
                            (got - expected).abs() <= 1e-12 * (mu + lambda),
                            "({i}{j},{k}{l}): {got} vs {expected}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn tangent_matches_finite_differences() {
        let m = mat();
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for _ in 0..5 {
            // random F near identity with positive determinant
            let mut f = [[1.0, 0.0], [0.0, 1.0]];
            for i in 0..2 {
                for j in 0..2 {
                    f[i][j] += rng.gen_range(-0.2..0.2);
                }
            }
            if det2(f) <= 0.1 {
                continue;
            }
            let f_norm = f.iter().flatten().map(|v| v * v).sum::<f64>().sqrt();
            let h = 1e-6 * f_norm;
            let a = piola_tangent(f, &m).unwrap();
            for k in 0..2 {
                for l in 0..2 {
                    let mut fp = f;
                    let mut fm = f;
                    fp[k][l] += h;
                    fm[k][l] -= h;
                    let pp = first_piola(fp, &m).unwrap();
                    let pm = first_piola(fm, &m).unwrap();
                    for i in 0..2 {
                        for j in 0..2 {
                            let fd = (pp[i][j] - pm[i][j]) / (2.0 * h);
                            let got = a[2 * i + j][2 * k + l];
                            let scale = fd.abs().max(m.mu());
                            assert!(
                                (got - fd).abs() <= 1e-6 * scale,
                                "A[{i}{j},{k}{l}]: {got} vs {fd}"
                            );
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn tangent_is_symmetric_as_second_derivative() {
        let m = mat();
        let mut rng = ChaCha8Rng::seed_from_u64(123);
        for _ in 0..10 {
            let mut f = [[1.0, 0.0], [0.0, 1.0]];
            for i in 0..2 {
                for j in 0..2 {
                    f[i][j] += rng.gen_range(-0.3..0.3);
                }
            }
            if det2(f) <= 0.05 {
                continue;
            }
            let a = piola_tangent(f, &m).unwrap();
            for p in 0..4 {
                for q in 0..4 {
                    let scale = a[p][q].abs().max(m.mu());
                    assert!((a[p][q] - a[q][p]).abs() <= 1e-12 * scale);
                }
            }
        }
    }
}

//! The standard complex structure of ℂ² = ℝ⁴ and its frame representation.

use crate::linalg::{mat4_mul, mat4_mul_vec, mat4_transpose, Mat4, Vec4, MAT4_IDENTITY};

/// A linear complex structure on ℝ⁴, stored as a row-major matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexStructure {
    pub matrix: Mat4,
}

impl Default for ComplexStructure {
    fn default() -> Self {
        Self::standard()
    }
}

impl ComplexStructure {
    /// `J E₁ = E₂`, `J E₃ = E₄`.
    pub const fn standard() -> Self {
        ComplexStructure {
            matrix: [
                [0.0, -1.0, 0.0, 0.0],
                [1.0, 0.0, 0.0, 0.0],
                [0.0, 0.0, 0.0, -1.0],
                [0.0, 0.0, 1.0, 0.0],
            ],
        }
    }

    pub fn apply(&self, v: &Vec4) -> Vec4 {
        mat4_mul_vec(&self.matrix, v)
    }

    /// Kähler form `ω(u, v) = ⟨J u, v⟩`.
    pub fn omega(&self, u: &Vec4, v: &Vec4) -> f64 {
        self.apply(u).dot(v)
    }

    /// Largest entry of `J² + I`, `JᵀJ − I` and `J + Jᵀ`.
    pub fn invariant_defect(&self) -> f64 {
        let m = &self.matrix;
        let sq = mat4_mul(m, m);
        let mt = mat4_transpose(m);
        let ortho = mat4_mul(&mt, m);
        let mut worst = 0.0f64;
        for i in 0..4 {
            for j in 0..4 {
                let id = MAT4_IDENTITY[i][j];
                worst = worst
                    .max((sq[i][j] + id).abs())
                    .max((ortho[i][j] - id).abs())
                    .max((m[i][j] + m[j][i]).abs());
            }
        }
        worst
    }

    /// Matrix `(⟨J e_a, e_b⟩)` of `J` in an orthonormal frame.
    pub fn frame_matrix(&self, frame: &[Vec4; 4]) -> Mat4 {
        let mut out = [[0.0; 4]; 4];
        for a in 0..4 {
            let ja = self.apply(&frame[a]);
            for b in 0..4 {
                out[a][b] = ja.dot(&frame[b]);
            }
        }
        out
    }
}

/// Parameters `(x, y, z)` of the self-dual normal form
///
/// ```text
///  0  x  y  z
/// -x  0  z -y
/// -y -z  0  x
/// -z  y -x  0
/// ```
///
/// read off a frame matrix, together with the largest deviation from that
/// pattern.
pub fn self_dual_form(m: &Mat4) -> ([f64; 3], f64) {
    let (x, y, z) = (m[0][1], m[0][2], m[0][3]);
    let pattern = [
        [0.0, x, y, z],
        [-x, 0.0, z, -y],
        [-y, -z, 0.0, x],
        [-z, y, -x, 0.0],
    ];
    let mut defect = 0.0f64;
    for i in 0..4 {
        for j in 0..4 {
            defect = defect.max((m[i][j] - pattern[i][j]).abs());
        }
    }
    ([x, y, z], defect)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn standard_structure_is_orthogonal_complex() {
        let j = ComplexStructure::standard();
        assert_eq!(j.invariant_defect(), 0.0);
        assert_eq!(j.apply(&Vec4::basis(0)), Vec4::basis(1));
        assert_eq!(j.apply(&Vec4::basis(2)), Vec4::basis(3));
    }

    #[test]
    fn standard_basis_frame_is_holomorphic_form() {
        let j = ComplexStructure::standard();
        let frame = [Vec4::basis(0), Vec4::basis(1), Vec4::basis(2), Vec4::basis(3)];
        let ([x, y, z], defect) = self_dual_form(&j.frame_matrix(&frame));
        assert_eq!((x, y, z, defect), (1.0, 0.0, 0.0, 0.0));
    }
}

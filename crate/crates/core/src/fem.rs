//! P1 finite elements for `−u″` on `(a, b)` with homogeneous Dirichlet data.
//!
//! Unknowns live on the `M` interior nodes `x_i = a + i·h`, `i = 1..=M`,
//! `h = (b − a)/(M + 1)`. Grid vectors are indexed from 0, so entry `k`
//! belongs to node `x_{k+1}`.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Deref, DerefMut};

use crate::error::{Error, Result};

/// 4-point Gauss-Legendre rule on `[−1, 1]`.
pub const GAUSS4_NODES: [f64; 4] = [
    -0.861_136_311_594_052_6,
    -0.339_981_043_584_856_3,
    0.339_981_043_584_856_3,
    0.861_136_311_594_052_6,
];
pub const GAUSS4_WEIGHTS: [f64; 4] = [
    0.347_854_845_137_453_9,
    0.652_145_154_862_546_1,
    0.652_145_154_862_546_1,
    0.347_854_845_137_453_9,
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mesh1D {
    pub a: f64,
    pub b: f64,
    /// Number of interior nodes.
    pub m: usize,
}

impl Mesh1D {
    pub fn new(a: f64, b: f64, m: usize) -> Result<Self> {
        if m == 0 || !(a < b) || !a.is_finite() || !b.is_finite() {
            return Err(Error::InvalidMesh);
        }
        Ok(Self { a, b, m })
    }

    pub fn h(&self) -> f64 {
        (self.b - self.a) / (self.m + 1) as f64
    }

    /// Node `x_i`, `i = 0..=M+1` (0 and `M + 1` are the endpoints).
    pub fn node(&self, i: usize) -> f64 {
        if i == self.m + 1 {
            self.b
        } else {
            self.a + i as f64 * self.h()
        }
    }

    /// Number of elements, `M + 1`.
    pub fn elements(&self) -> usize {
        self.m + 1
    }

    /// Gauss points and weights of element `e` (between nodes `e` and `e + 1`).
    pub fn quadrature(&self, e: usize) -> impl Iterator<Item = (f64, f64)> {
        let (lo, hi) = (self.node(e), self.node(e + 1));
        let mid = 0.5 * (lo + hi);
        let half = 0.5 * (hi - lo);
        GAUSS4_NODES
            .iter()
            .zip(GAUSS4_WEIGHTS.iter())
            .map(move |(&s, &w)| (mid + half * s, half * w))
    }
}

/// Nodal values on the interior nodes; boundary values are implicitly zero.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct GridFunction(pub Vec<f64>);

impl GridFunction {
    pub fn zeros(m: usize) -> Self {
        Self(vec![0.0; m])
    }

    /// Nodal interpolant of `f`.
    pub fn interpolate(mesh: &Mesh1D, f: impl Fn(f64) -> f64) -> Self {
        Self((1..=mesh.m).map(|i| f(mesh.node(i))).collect())
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    /// `self += s·x`
    pub fn axpy(&mut self, s: f64, x: &[f64]) {
        for (y, &xi) in self.0.iter_mut().zip(x) {
            *y += s * xi;
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0, |m, v| m.max(libm::fabs(*v)))
    }

    /// Value of the piecewise-linear interpolant at `x` in element `e`.
    pub fn eval_in_element(&self, mesh: &Mesh1D, e: usize, x: f64) -> f64 {
        let left = if e == 0 { 0.0 } else { self.0[e - 1] };
        let right = if e == mesh.m { 0.0 } else { self.0[e] };
        let t = (x - mesh.node(e)) / mesh.h();
        left + (right - left) * t
    }
}

impl Deref for GridFunction {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl DerefMut for GridFunction {
    fn deref_mut(&mut self) -> &mut [f64] {
        &mut self.0
    }
}

impl From<Vec<f64>> for GridFunction {
    fn from(v: Vec<f64>) -> Self {
        Self(v)
    }
}

/// Tridiagonal matrix; `lower[i]` sits at `(i + 1, i)`, `upper[i]` at `(i, i + 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TridiagonalMatrix {
    pub lower: Vec<f64>,
    pub diag: Vec<f64>,
    pub upper: Vec<f64>,
}

impl TridiagonalMatrix {
    pub fn new(lower: Vec<f64>, diag: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        let n = diag.len();
        let off = n.saturating_sub(1);
        if lower.len() != off {
            return Err(Error::DimensionMismatch { expected: off, got: lower.len() });
        }
        if upper.len() != off {
            return Err(Error::DimensionMismatch { expected: off, got: upper.len() });
        }
        Ok(Self { lower, diag, upper })
    }

    /// Symmetric Toeplitz matrix with constant diagonal and off-diagonal.
    pub fn symmetric_toeplitz(n: usize, diag: f64, off: f64) -> Self {
        Self {
            lower: vec![off; n.saturating_sub(1)],
            diag: vec![diag; n],
            upper: vec![off; n.saturating_sub(1)],
        }
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn is_symmetric(&self) -> bool {
        self.lower == self.upper
    }

    /// `out = self · x`
    pub fn apply_into(&self, x: &[f64], out: &mut [f64]) {
        let n = self.dim();
        debug_assert!(x.len() == n && out.len() == n);
        if n == 0 {
            return;
        }
        for i in 0..n {
            let mut s = self.diag[i] * x[i];
            if i > 0 {
                s += self.lower[i - 1] * x[i - 1];
            }
            if i + 1 < n {
                s += self.upper[i] * x[i + 1];
            }
            out[i] = s;
        }
    }

    pub fn apply(&self, x: &[f64]) -> GridFunction {
        let mut out = GridFunction::zeros(self.dim());
        self.apply_into(x, &mut out);
        out
    }

    /// Entrywise absolute value.
    pub fn abs(&self) -> Self {
        let a = |v: &[f64]| v.iter().map(|x| libm::fabs(*x)).collect();
        Self { lower: a(&self.lower), diag: a(&self.diag), upper: a(&self.upper) }
    }

    /// `s·self + t·other`
    pub fn combine(&self, s: f64, other: &Self, t: f64) -> Self {
        let mix = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| s * x + t * y).collect();
        Self {
            lower: mix(&self.lower, &other.lower),
            diag: mix(&self.diag, &other.diag),
            upper: mix(&self.upper, &other.upper),
        }
    }

    /// Thomas elimination without pivoting; fails on a non-positive pivot.
    pub fn factor(&self) -> Result<TridiagonalFactor> {
        let n = self.dim();
        let mut pivots = Vec::with_capacity(n);
        let mut multipliers = Vec::with_capacity(n.saturating_sub(1));
        for i in 0..n {
            let pivot = if i == 0 {
                self.diag[0]
            } else {
                self.diag[i] - self.lower[i - 1] * multipliers[i - 1]
            };
            if !(pivot > 0.0) {
                return Err(Error::NotPositiveDefinite { row: i, pivot });
            }
            pivots.push(pivot);
            if i + 1 < n {
                multipliers.push(self.upper[i] / pivot);
            }
        }
        Ok(TridiagonalFactor { lower: self.lower.clone(), pivots, multipliers })
    }
}

/// Result of [`TridiagonalMatrix::factor`], reusable across right-hand sides.
#[derive(Debug, Clone)]
pub struct TridiagonalFactor {
    lower: Vec<f64>,
    pivots: Vec<f64>,
    multipliers: Vec<f64>,
}

impl TridiagonalFactor {
    pub fn pivots(&self) -> &[f64] {
        &self.pivots
    }

    pub fn solve(&self, rhs: &[f64]) -> Result<GridFunction> {
        let mut x = rhs.to_vec();
        self.solve_in_place(&mut x)?;
        Ok(GridFunction(x))
    }

    pub fn solve_in_place(&self, x: &mut [f64]) -> Result<()> {
        let n = self.pivots.len();
        if x.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: x.len() });
        }
        if n == 0 {
            return Ok(());
        }
        x[0] /= self.pivots[0];
        for i in 1..n {
            x[i] = (x[i] - self.lower[i - 1] * x[i - 1]) / self.pivots[i];
        }
        for i in (0..n - 1).rev() {
            x[i] -= self.multipliers[i] * x[i + 1];
        }
        Ok(())
    }
}

/// Solve `T x = rhs` for symmetric positive definite tridiagonal `T`.
pub fn solve_tridiagonal(t: &TridiagonalMatrix, rhs: &[f64]) -> Result<GridFunction> {
    if rhs.len() != t.dim() {
        return Err(Error::DimensionMismatch { expected: t.dim(), got: rhs.len() });
    }
    t.factor()?.solve(rhs)
}

/// Consistent mass and stiffness matrices of the P1 space.
pub fn assemble(mesh: &Mesh1D) -> (TridiagonalMatrix, TridiagonalMatrix) {
    let h = mesh.h();
    let mass = TridiagonalMatrix::symmetric_toeplitz(mesh.m, 2.0 * h / 3.0, h / 6.0);
    let stiffness = TridiagonalMatrix::symmetric_toeplitz(mesh.m, 2.0 / h, -1.0 / h);
    (mass, stiffness)
}

/// A mesh with its assembled operators and a factored mass matrix.
#[derive(Debug, Clone)]
pub struct Space {
    pub mesh: Mesh1D,
    pub mass: TridiagonalMatrix,
    pub stiffness: TridiagonalMatrix,
    mass_factor: TridiagonalFactor,
}

impl Space {
    pub fn new(mesh: Mesh1D) -> Result<Self> {
        let (mass, stiffness) = assemble(&mesh);
        let mass_factor = mass.factor()?;
        Ok(Self { mesh, mass, stiffness, mass_factor })
    }

    pub fn m(&self) -> usize {
        self.mesh.m
    }

    /// `M^{-1} load`
    pub fn solve_mass(&self, load: &[f64]) -> Result<GridFunction> {
        self.mass_factor.solve(load)
    }
}

/// `load_i = ∫ f φ_i`, 4-point Gauss per element.
pub fn load_vector(mesh: &Mesh1D, f: impl Fn(f64) -> f64) -> GridFunction {
    let h = mesh.h();
    let mut load = GridFunction::zeros(mesh.m);
    for e in 0..mesh.elements() {
        let x0 = mesh.node(e);
        let (mut left, mut right) = (0.0, 0.0);
        for (x, w) in mesh.quadrature(e) {
            let fx = f(x) * w;
            let t = (x - x0) / h;
            left += fx * (1.0 - t);
            right += fx * t;
        }
        if e > 0 {
            load[e - 1] += left;
        }
        if e < mesh.m {
            load[e] += right;
        }
    }
    load
}

/// `load_i = ∫_c^d φ_i`, integrated exactly by splitting elements at `c`, `d`.
pub fn indicator_load(mesh: &Mesh1D, c: f64, d: f64) -> GridFunction {
    let h = mesh.h();
    let mut load = GridFunction::zeros(mesh.m);
    for e in 0..mesh.elements() {
        let x0 = mesh.node(e);
        let lo = x0.max(c);
        let hi = mesh.node(e + 1).min(d);
        if hi <= lo {
            continue;
        }
        // linear integrand: length times midpoint value
        let t = (0.5 * (lo + hi) - x0) / h;
        let len = hi - lo;
        if e > 0 {
            load[e - 1] += len * (1.0 - t);
        }
        if e < mesh.m {
            load[e] += len * t;
        }
    }
    load
}

/// L² projection of a function onto the P1 space.
pub fn l2_project(space: &Space, f: impl Fn(f64) -> f64) -> Result<GridFunction> {
    space.solve_mass(&load_vector(&space.mesh, f))
}

/// L² projection of the indicator of `(c, d)`.
pub fn l2_project_indicator(space: &Space, c: f64, d: f64) -> Result<GridFunction> {
    space.solve_mass(&indicator_load(&space.mesh, c, d))
}

/// `b_i = ∫ v′ φ_i′` by 4-point Gauss per element.
pub fn ritz_load(mesh: &Mesh1D, dv: impl Fn(f64) -> f64) -> GridFunction {
    let inv_h = 1.0 / mesh.h();
    let mut b = GridFunction::zeros(mesh.m);
    for e in 0..mesh.elements() {
        let integral: f64 = mesh.quadrature(e).map(|(x, w)| dv(x) * w).sum();
        // on element e the left node's hat has slope −1/h, the right node's +1/h
        if e > 0 {
            b[e - 1] -= integral * inv_h;
        }
        if e < mesh.m {
            b[e] += integral * inv_h;
        }
    }
    b
}

/// Ritz projection given the derivative `v′` of a function vanishing at both ends.
pub fn ritz_project(space: &Space, dv: impl Fn(f64) -> f64) -> Result<GridFunction> {
    solve_tridiagonal(&space.stiffness, &ritz_load(&space.mesh, dv))
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::PI;
    use proptest::prelude::*;

    /// Dense Gaussian elimination with partial pivoting.
    fn dense_solve(t: &TridiagonalMatrix, rhs: &[f64]) -> Vec<f64> {
        let n = t.dim();
        let mut a = vec![vec![0.0; n + 1]; n];
        for i in 0..n {
            a[i][i] = t.diag[i];
            if i > 0 {
                a[i][i - 1] = t.lower[i - 1];
            }
            if i + 1 < n {
                a[i][i + 1] = t.upper[i];
            }
            a[i][n] = rhs[i];
        }
        for col in 0..n {
            let p = (col..n)
                .max_by(|&r, &s| a[r][col].abs().partial_cmp(&a[s][col].abs()).unwrap())
                .unwrap();
            a.swap(col, p);
            for r in col + 1..n {
                let f = a[r][col] / a[col][col];
                for k in col..=n {
                    a[r][k] -= f * a[col][k];
                }
            }
        }
        let mut x = vec![0.0; n];
        for i in (0..n).rev() {
            let s: f64 = (i + 1..n).map(|k| a[i][k] * x[k]).sum();
            x[i] = (a[i][n] - s) / a[i][i];
        }
        x
    }

    fn spd_strategy() -> impl Strategy<Value = (TridiagonalMatrix, Vec<f64>)> {
        (1usize..=200).prop_flat_map(|n| {
            (
                proptest::collection::vec(-1.0f64..1.0, n.saturating_sub(1)),
                proptest::collection::vec(0.1f64..1.0, n),
                proptest::collection::vec(-10.0f64..10.0, n),
            )
                .prop_map(move |(off, extra, rhs)| {
                    // diagonal dominance ⇒ SPD
                    let diag = (0..n)
                        .map(|i| {
                            let l = if i > 0 { off[i - 1].abs() } else { 0.0 };
                            let r = if i + 1 < n { off[i].abs() } else { 0.0 };
                            l + r + extra[i]
                        })
                        .collect();
                    (TridiagonalMatrix::new(off.clone(), diag, off).unwrap(), rhs)
                })
        })
    }

    #[test]
    fn single_element_and_small_mesh() {
        let mesh = Mesh1D::new(0.0, 2.0, 1).unwrap();
        let (mass, stiff) = assemble(&mesh);
        assert!((mass.diag[0] - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(stiff.diag, vec![2.0]);

        let mesh = Mesh1D::new(0.0, 1.0, 3).unwrap();
        let (mass, stiff) = assemble(&mesh);
        assert_eq!(mesh.h(), 0.25);
        assert!(mass.diag.iter().all(|&d| (d - 1.0 / 6.0).abs() < 1e-15));
        assert!(mass.lower.iter().all(|&d| (d - 1.0 / 24.0).abs() < 1e-15));
        assert!(mass.is_symmetric() && stiff.is_symmetric());

        let mesh = Mesh1D::new(0.0, 1.0, 9).unwrap();
        let (_, stiff) = assemble(&mesh);
        let ones = stiff.apply(&[1.0; 9]);
        assert!(ones[1..8].iter().all(|v| v.abs() < 1e-12));
        assert!(ones[0] > 0.0 && ones[8] > 0.0);
    }

    #[test]
    fn assembled_matrices_are_spd() {
        for m in [1, 2, 7, 100, 1023] {
            let (mass, stiff) = assemble(&Mesh1D::new(0.0, PI, m).unwrap());
            assert!(mass.factor().unwrap().pivots().iter().all(|&p| p > 0.0));
            assert!(stiff.factor().unwrap().pivots().iter().all(|&p| p > 0.0));
        }
    }

    #[test]
    fn mesh_validation() {
        assert_eq!(Mesh1D::new(0.0, 1.0, 0), Err(Error::InvalidMesh));
        assert_eq!(Mesh1D::new(1.0, 1.0, 3), Err(Error::InvalidMesh));
        let mesh = Mesh1D::new(0.0, 1.0, 3).unwrap();
        assert_eq!(mesh.node(4), 1.0);
        assert!((1..=4).all(|i| mesh.node(i) > mesh.node(i - 1)));
    }

    #[test]
    fn identity_solve_and_errors() {
        let id = TridiagonalMatrix::symmetric_toeplitz(4, 1.0, 0.0);
        let rhs = [1.0, -2.0, 3.0, 4.5];
        assert_eq!(solve_tridiagonal(&id, &rhs).unwrap().0, rhs.to_vec());
        let indefinite = TridiagonalMatrix::symmetric_toeplitz(3, 1.0, 2.0);
        assert!(matches!(
            solve_tridiagonal(&indefinite, &[1.0; 3]),
            Err(Error::NotPositiveDefinite { row: 1, .. })
        ));
        assert!(matches!(
            solve_tridiagonal(&id, &[1.0; 3]),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(TridiagonalMatrix::new(vec![1.0], vec![1.0; 3], vec![1.0, 1.0]).is_err());
    }

    #[test]
    fn discrete_poisson_matches_dense() {
        let mesh = Mesh1D::new(0.0, 1.0, 3).unwrap();
        let (mass, stiff) = assemble(&mesh);
        let rhs = mass.apply(&GridFunction::interpolate(&mesh, libm::sin));
        let x = solve_tridiagonal(&stiff, &rhs).unwrap();
        let oracle = dense_solve(&stiff, &rhs);
        for (a, b) in x.iter().zip(&oracle) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn l2_projection_cases() {
        let space = Space::new(Mesh1D::new(0.0, 1.0, 7).unwrap()).unwrap();
        assert!(l2_project(&space, |_| 0.0).unwrap().iter().all(|&v| v == 0.0));

        // hat function of node 3 (vector index 2)
        let mesh = space.mesh;
        let hat = move |x: f64| (1.0 - ((x - mesh.node(3)) / mesh.h()).abs()).max(0.0);
        let p = l2_project(&space, hat).unwrap();
        for (k, v) in p.iter().enumerate() {
            let want = if k == 2 { 1.0 } else { 0.0 };
            assert!((v - want).abs() < 1e-13, "k={k}: {v}");
        }

        // ∫_0^{1/2} φ_i: h for nodes left of 1/2, h/2 at the node 1/2, 0 beyond
        let load = indicator_load(&mesh, 0.0, 0.5);
        let h = mesh.h();
        let want = [h, h, h, h / 2.0, 0.0, 0.0, 0.0];
        for (a, b) in load.iter().zip(want) {
            assert!((a - b).abs() < 1e-15);
        }
        // indicator with cut inside an element: (0, 0.3), h = 1/8
        let load = indicator_load(&mesh, 0.0, 0.3);
        // node 2 (x=0.25): ∫_{0.125}^{0.25} + ∫_{0.25}^{0.3} of hat
        let node2 = h / 2.0 + (0.05 - 0.05 * 0.05 / (2.0 * h));
        assert!((load[1] - node2).abs() < 1e-15);
        // node 3 (x=0.375): rising part on [0.25, 0.3]
        assert!((load[2] - 0.05 * 0.05 / (2.0 * h)).abs() < 1e-15);
    }

    #[test]
    fn ritz_projection_cases() {
        let space = Space::new(Mesh1D::new(0.0, 1.0, 15).unwrap()).unwrap();
        let mesh = space.mesh;
        // piecewise linear member of V_h: tent peaking at x_5
        let peak = mesh.node(5);
        let dv = move |x: f64| if x < peak { 1.0 } else { -peak / (1.0 - peak) };
        let r = ritz_project(&space, dv).unwrap();
        let exact =
            GridFunction::interpolate(&mesh, |x| if x < peak { x } else { peak * (1.0 - x) / (1.0 - peak) });
        for (a, b) in r.iter().zip(exact.iter()) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!(ritz_project(&space, |_| 0.0).unwrap().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn ritz_of_sine_converges_and_is_orthogonal() {
        let dev = |m: usize| {
            let space = Space::new(Mesh1D::new(0.0, PI, m).unwrap()).unwrap();
            let r = ritz_project(&space, libm::cos).unwrap();
            // Galerkin orthogonality: A·r − b = 0
            let b = ritz_load(&space.mesh, libm::cos);
            let res = space.stiffness.apply(&r);
            for (x, y) in res.iter().zip(b.iter()) {
                assert!((x - y).abs() <= 1e-10);
            }
            (1..=m)
                .map(|i| (r[i - 1] - libm::sin(space.mesh.node(i))).abs())
                .fold(0.0, f64::max)
        };
        let (coarse, fine) = (dev(31), dev(127));
        assert!(fine < 1e-4);
        // 1D Ritz projection is nodally exact up to quadrature error, so the
        // deviation is at worst second order in h
        assert!(fine <= coarse / 10.0 || fine < 1e-9, "{coarse} {fine}");
    }

    #[test]
    fn l2_projection_is_idempotent() {
        let space = Space::new(Mesh1D::new(0.0, 1.0, 20).unwrap()).unwrap();
        let mesh = space.mesh;
        let p = l2_project(&space, |x| x * x * (1.0 - x).exp()).unwrap();
        let pp = {
            let p2 = p.clone();
            l2_project(&space, move |x| {
                let e = ((x - mesh.a) / mesh.h()) as usize;
                p2.eval_in_element(&mesh, e.min(mesh.m), x)
            })
            .unwrap()
        };
        for (a, b) in p.iter().zip(pp.iter()) {
            assert!((a - b).abs() < 1e-13);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]
        #[test]
        fn thomas_matches_dense((t, rhs) in spd_strategy()) {
            let x = solve_tridiagonal(&t, &rhs).unwrap();
            let oracle = dense_solve(&t, &rhs);
            let scale = oracle.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-300);
            for (a, b) in x.iter().zip(&oracle) {
                prop_assert!((a - b).abs() <= 1e-12 * scale);
            }
            let r = t.apply(&x);
            let rhs_max = rhs.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            for (a, b) in r.iter().zip(&rhs) {
                prop_assert!((a - b).abs() <= 1e-12 * rhs_max.max(1e-300));
            }
        }
    }
}

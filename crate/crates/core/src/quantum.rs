//! Joint tables `tr[ρ(M₁^{(s₁)}⊗⋯⊗M_N^{(s_N)})]` from small quantum states
//! and POVMs.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::scenario::{DistributionFamily, Scenario};
use crate::tensor::Tensor;

pub type CMatrix = DMatrix<Complex64>;

/// Largest total Hilbert-space dimension accepted.
pub const MAX_TOTAL_DIM: usize = 16;

/// Eigenvalue floor for positive semidefiniteness checks.
pub const PSD_FLOOR: f64 = -1e-10;

fn hermitian_gap(m: &CMatrix) -> f64 {
    (m - m.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn min_eigenvalue(m: &CMatrix) -> f64 {
    // Hermitian part only; callers check the anti-Hermitian part separately.
    let h = (m + m.adjoint()) * Complex64::new(0.5, 0.0);
    h.symmetric_eigenvalues().iter().cloned().fold(f64::INFINITY, f64::min)
}

fn check_psd(m: &CMatrix, tol: f64, what: &str) -> Result<()> {
    if !m.is_square() {
        return Err(Error::input(format!("{what} is not square")));
    }
    if hermitian_gap(m) > tol {
        return Err(Error::input(format!("{what} is not Hermitian")));
    }
    let lo = min_eigenvalue(m);
    if lo < PSD_FLOOR {
        return Err(Error::input(format!("{what} has eigenvalue {lo} below {PSD_FLOOR}")));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    matrix: CMatrix,
}

impl DensityMatrix {
    pub fn new(matrix: CMatrix, tol: f64) -> Result<Self> {
        check_psd(&matrix, tol, "density matrix")?;
        let tr = matrix.trace();
        if (tr - Complex64::new(1.0, 0.0)).norm() > tol {
            return Err(Error::input(format!("density matrix has trace {tr}")));
        }
        Ok(DensityMatrix { matrix })
    }

    /// `|ψ⟩⟨ψ|` for a normalized state vector.
    pub fn pure(psi: &[Complex64], tol: f64) -> Result<Self> {
        let v = nalgebra::DVector::from_column_slice(psi);
        DensityMatrix::new(&v * v.adjoint(), tol)
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        DensityMatrix {
            matrix: CMatrix::identity(dim, dim) * Complex64::new(1.0 / dim as f64, 0.0),
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Povm {
    effects: Vec<CMatrix>,
}

impl Povm {
    pub fn new(effects: Vec<CMatrix>, tol: f64) -> Result<Self> {
        let dim = effects
            .first()
            .ok_or_else(|| Error::input("POVM needs at least one effect"))?
            .nrows();
        let mut sum = CMatrix::zeros(dim, dim);
        for (i, e) in effects.iter().enumerate() {
            if e.nrows() != dim || e.ncols() != dim {
                return Err(Error::input("POVM effects differ in dimension"));
            }
            check_psd(e, tol, &format!("effect {}", i + 1))?;
            sum += e;
        }
        let gap = (sum - CMatrix::identity(dim, dim))
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        if gap > tol {
            return Err(Error::input(format!("POVM effects sum to identity only within {gap}")));
        }
        Ok(Povm { effects })
    }

    /// Qubit projective measurement along the Bloch direction
    /// `(sin θ cos φ, sin θ sin φ, cos θ)`; outcome 0 is the `+1` eigenspace.
    pub fn qubit_projective(theta: f64, phi: f64) -> Self {
        let (nx, ny, nz) = (theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos());
        let c = Complex64::new;
        let n_sigma = CMatrix::from_row_slice(2, 2, &[c(nz, 0.0), c(nx, -ny), c(nx, ny), c(-nz, 0.0)]);
        let id = CMatrix::identity(2, 2);
        let half = c(0.5, 0.0);
        Povm {
            effects: vec![(&id + &n_sigma) * half, (&id - &n_sigma) * half],
        }
    }

    pub fn dim(&self) -> usize {
        self.effects[0].nrows()
    }

    pub fn n_outcomes(&self) -> usize {
        self.effects.len()
    }

    pub fn effects(&self) -> &[CMatrix] {
        &self.effects
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuantumScenario {
    site_dims: Vec<usize>,
    rho: DensityMatrix,
    /// `povms[site][setting]`.
    povms: Vec<Vec<Povm>>,
}

impl QuantumScenario {
    pub fn new(site_dims: Vec<usize>, rho: DensityMatrix, povms: Vec<Vec<Povm>>) -> Result<Self> {
        if site_dims.is_empty() || site_dims.contains(&0) {
            return Err(Error::input("site dimensions must be positive"));
        }
        let total = site_dims
            .iter()
            .try_fold(1usize, |a, &d| a.checked_mul(d))
            .filter(|&t| t <= MAX_TOTAL_DIM)
            .ok_or_else(|| Error::input(format!("total dimension exceeds {MAX_TOTAL_DIM}")))?;
        if rho.dim() != total {
            return Err(Error::input(format!(
                "state has dimension {}, sites multiply to {total}",
                rho.dim()
            )));
        }
        if povms.len() != site_dims.len() {
            return Err(Error::input("one POVM list per site is required"));
        }
        for (n, (site, &d)) in povms.iter().zip(&site_dims).enumerate() {
            if site.is_empty() {
                return Err(Error::input(format!("site {} has no measurements", n + 1)));
            }
            if site.iter().any(|p| p.dim() != d) {
                return Err(Error::input(format!("site {} POVM dimension differs from {d}", n + 1)));
            }
            let k = site[0].n_outcomes();
            if site.iter().any(|p| p.n_outcomes() != k) {
                return Err(Error::input(format!(
                    "site {} settings have different outcome counts",
                    n + 1
                )));
            }
        }
        Ok(QuantumScenario { site_dims, rho, povms })
    }

    pub fn site_dims(&self) -> &[usize] {
        &self.site_dims
    }

    pub fn rho(&self) -> &DensityMatrix {
        &self.rho
    }

    pub fn povms(&self) -> &[Vec<Povm>] {
        &self.povms
    }

    pub fn scenario(&self) -> Scenario {
        Scenario::new(
            self.povms.iter().map(|p| p.len()).collect(),
            self.povms.iter().map(|p| p[0].n_outcomes()).collect(),
        )
        .expect("validated at construction")
    }
}

/// Born-rule family. Entries are the real parts of the traces; every table
/// is checked to sum to one within `tol`.
pub fn born_family(q: &QuantumScenario, tol: f64) -> Result<DistributionFamily<f64>> {
    let scenario = q.scenario();
    let rho = q.rho.matrix();
    let shape = scenario.outcomes().to_vec();
    DistributionFamily::from_fn(scenario, tol, |tuple| {
        Tensor::from_fn(shape.clone(), |out| {
            let mut op = CMatrix::identity(1, 1);
            for (site, (&s, &o)) in tuple.settings().iter().zip(out).enumerate() {
                op = op.kronecker(&q.povms[site][s].effects[o]);
            }
            // tr(ρ·op) = Σ_ij ρ_ij op_ji
            let mut tr = Complex64::new(0.0, 0.0);
            for i in 0..rho.nrows() {
                for j in 0..rho.ncols() {
                    tr += rho[(i, j)] * op[(j, i)];
                }
            }
            tr.re
        })
    })
}

/// `(|01⟩ − |10⟩)/√2`.
pub fn singlet() -> DensityMatrix {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let z = Complex64::new(0.0, 0.0);
    DensityMatrix::pure(&[z, Complex64::new(h, 0.0), Complex64::new(-h, 0.0), z], 1e-12)
        .expect("singlet is a valid state")
}

/// Singlet with measurement directions in the x–z plane that reach
/// `CHSH = 2√2`: site 1 at angles 0 and π/2, site 2 at 5π/4 and 3π/4.
pub fn chsh_singlet() -> QuantumScenario {
    use std::f64::consts::PI;
    let alice = vec![Povm::qubit_projective(0.0, 0.0), Povm::qubit_projective(PI / 2.0, 0.0)];
    let bob = vec![
        Povm::qubit_projective(5.0 * PI / 4.0, 0.0),
        Povm::qubit_projective(3.0 * PI / 4.0, 0.0),
    ];
    QuantumScenario::new(vec![2, 2], singlet(), vec![alice, bob]).expect("valid CHSH scenario")
}

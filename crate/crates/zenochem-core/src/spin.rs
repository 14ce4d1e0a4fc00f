//! Spin operators for a radical pair: two electrons (spin 1/2) plus any number
//! of nuclei of arbitrary half-integer spin.
//!
//! The full Hilbert space is the tensor product
//! `electron1 (x) electron2 (x) nucleus1 (x) nucleus2 (x) ...`
//! with nuclei in declaration order, so `dim = 4 * n` where `n` is the product
//! of nuclear multiplicities `2I_j + 1`. Singlet/triplet projectors are built
//! from the electron exchange term: `QS = 1/4 - s1.s2`, `QT = 3/4 + s1.s2`
//! (identity factors implied). They satisfy `QS + QT = 1`, `QS^2 = QS`,
//! `QT^2 = QT`, `QS QT = 0`, `Tr QS = n`, `Tr QT = 3n`.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::matrix::{kron, ComplexMatrix};

/// Default cap on the total Hilbert-space dimension.
pub const DEFAULT_DIM_CAP: usize = 4096;

/// A half-integer spin quantum number, stored doubled so 1/2, 1, 3/2, ... are exact.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Spin {
    twice: u32,
}

impl Spin {
    pub const HALF: Spin = Spin { twice: 1 };
    pub const ONE: Spin = Spin { twice: 2 };

    /// Accepts 0.5, 1.0, 1.5, ... — anything else is rejected.
    pub fn new(value: f64) -> Result<Self> {
        let twice = value * 2.0;
        if !(twice.is_finite() && twice >= 1.0 && twice.fract() == 0.0 && twice <= u32::MAX as f64)
        {
            return Err(Error::InvalidSpin { value });
        }
        Ok(Spin { twice: twice as u32 })
    }

    pub fn value(self) -> f64 {
        self.twice as f64 / 2.0
    }

    /// 2I + 1.
    pub fn multiplicity(self) -> usize {
        self.twice as usize + 1
    }
}

/// Which electron a nucleus is hyperfine-coupled to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Electron {
    First,
    Second,
}

/// One nucleus: spin, 3x3 hyperfine tensor (rows index the nuclear axis,
/// columns the electron axis; units 1/us), and the electron it couples to.
#[derive(Clone, Debug, PartialEq)]
pub struct NucleusSpec {
    pub spin: Spin,
    pub hyperfine: [[f64; 3]; 3],
    pub coupled_electron: Electron,
}

impl NucleusSpec {
    /// Diagonal tensor diag(ax, ay, az) coupled to the first electron.
    pub fn diagonal(spin: Spin, ax: f64, ay: f64, az: f64) -> Self {
        NucleusSpec {
            spin,
            hyperfine: [[ax, 0.0, 0.0], [0.0, ay, 0.0], [0.0, 0.0, az]],
            coupled_electron: Electron::First,
        }
    }
}

/// The spin system: nuclei (possibly none) and a dimension cap.
#[derive(Clone, Debug, PartialEq)]
pub struct SystemSpec {
    pub nuclei: Vec<NucleusSpec>,
    pub dim_cap: usize,
}

impl Default for SystemSpec {
    fn default() -> Self {
        SystemSpec { nuclei: Vec::new(), dim_cap: DEFAULT_DIM_CAP }
    }
}

impl SystemSpec {
    pub fn new(nuclei: Vec<NucleusSpec>) -> Self {
        SystemSpec { nuclei, dim_cap: DEFAULT_DIM_CAP }
    }

    /// Product of nuclear multiplicities (1 when there are no nuclei).
    pub fn nuclear_multiplicity(&self) -> usize {
        self.nuclei.iter().map(|n| n.spin.multiplicity()).product()
    }

    /// Total Hilbert-space dimension, 4n.
    pub fn dim(&self) -> usize {
        4 * self.nuclear_multiplicity()
    }

    pub fn validate(&self) -> Result<()> {
        let mut dim: usize = 4;
        for nuc in &self.nuclei {
            dim = dim
                .checked_mul(nuc.spin.multiplicity())
                .ok_or(Error::DimensionCap { dim: usize::MAX, cap: self.dim_cap })?;
            for row in &nuc.hyperfine {
                for &a in row {
                    if !a.is_finite() {
                        return Err(Error::param("hyperfine", "tensor entries must be finite"));
                    }
                }
            }
        }
        if dim > self.dim_cap {
            return Err(Error::DimensionCap { dim, cap: self.dim_cap });
        }
        Ok(())
    }
}

/// Cartesian components of one spin, embedded in the full space.
#[derive(Clone, Debug)]
pub struct SpinVector {
    pub x: ComplexMatrix,
    pub y: ComplexMatrix,
    pub z: ComplexMatrix,
}

impl SpinVector {
    pub fn component(&self, axis: usize) -> &ComplexMatrix {
        match axis {
            0 => &self.x,
            1 => &self.y,
            2 => &self.z,
            _ => panic!("spin axis must be 0, 1, or 2"),
        }
    }

    /// v . S for a real 3-vector v.
    pub fn dot3(&self, v: [f64; 3]) -> ComplexMatrix {
        &self.x * v[0] + &self.y * v[1] + &self.z * v[2]
    }

    /// S . S' (sum of componentwise products; operators of *different* spins commute).
    pub fn dot_spin(&self, other: &SpinVector) -> ComplexMatrix {
        &self.x * &other.x + &self.y * &other.y + &self.z * &other.z
    }
}

/// All operators of the system, embedded in the full Hilbert space.
#[derive(Clone, Debug)]
pub struct SpinOperatorSet {
    dim: usize,
    nuclear_multiplicity: usize,
    s1: SpinVector,
    s2: SpinVector,
    nuclei: Vec<SpinVector>,
    singlet_projector: ComplexMatrix,
    triplet_projector: ComplexMatrix,
}

impl SpinOperatorSet {
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// n = dim / 4.
    pub fn nuclear_multiplicity(&self) -> usize {
        self.nuclear_multiplicity
    }

    pub fn electron1(&self) -> &SpinVector {
        &self.s1
    }

    pub fn electron2(&self) -> &SpinVector {
        &self.s2
    }

    pub fn electron(&self, which: Electron) -> &SpinVector {
        match which {
            Electron::First => &self.s1,
            Electron::Second => &self.s2,
        }
    }

    pub fn nucleus(&self, index: usize) -> &SpinVector {
        &self.nuclei[index]
    }

    pub fn nuclei(&self) -> &[SpinVector] {
        &self.nuclei
    }

    /// QS: projects onto the electron-singlet subspace.
    pub fn singlet_projector(&self) -> &ComplexMatrix {
        &self.singlet_projector
    }

    /// QT: projects onto the electron-triplet subspace.
    pub fn triplet_projector(&self) -> &ComplexMatrix {
        &self.triplet_projector
    }
}

/// Single-spin operators in the (2I+1)-dimensional space, basis ordered
/// m = I, I-1, ..., -I. Built from the ladder elements
/// `<m±1| S± |m> = sqrt(I(I+1) - m(m±1))`.
pub fn single_spin_operators(spin: Spin) -> SpinVector {
    let d = spin.multiplicity();
    let i_val = spin.value();
    let m_of = |k: usize| i_val - k as f64; // basis index -> magnetic quantum number

    let mut plus = ComplexMatrix::zeros(d);
    for k in 1..d {
        // S+ raises m: |m_k + 1> = basis index k-1.
        let m = m_of(k);
        let amp = (i_val * (i_val + 1.0) - m * (m + 1.0)).sqrt();
        plus.set(k - 1, k, C64::new(amp, 0.0));
    }
    let minus = plus.dagger();
    let x = (&plus + &minus) * 0.5;
    let y = (&plus - &minus) * C64::new(0.0, -0.5);
    let z = ComplexMatrix::from_fn(d, |i, j| {
        if i == j { C64::new(m_of(i), 0.0) } else { C64::new(0.0, 0.0) }
    });
    SpinVector { x, y, z }
}

/// Embeds a local operator at `position` in a tensor product with the given
/// factor dimensions (identity everywhere else).
fn embed(local: &ComplexMatrix, position: usize, factor_dims: &[usize]) -> Result<ComplexMatrix> {
    assert_eq!(local.dim(), factor_dims[position]);
    let mut out = ComplexMatrix::identity(1);
    for (idx, &d) in factor_dims.iter().enumerate() {
        out = if idx == position {
            kron(&out, local)?
        } else {
            kron(&out, &ComplexMatrix::identity(d))?
        };
    }
    Ok(out)
}

/// Builds every operator of the system in the full Hilbert space.
pub fn build_space(spec: &SystemSpec) -> Result<SpinOperatorSet> {
    spec.validate()?;
    let n = spec.nuclear_multiplicity();
    let dim = 4 * n;

    let mut factor_dims = vec![2usize, 2];
    factor_dims.extend(spec.nuclei.iter().map(|nu| nu.spin.multiplicity()));

    let embed_spin = |local: &SpinVector, position: usize| -> Result<SpinVector> {
        Ok(SpinVector {
            x: embed(&local.x, position, &factor_dims)?,
            y: embed(&local.y, position, &factor_dims)?,
            z: embed(&local.z, position, &factor_dims)?,
        })
    };

    let half = single_spin_operators(Spin::HALF);
    let s1 = embed_spin(&half, 0)?;
    let s2 = embed_spin(&half, 1)?;
    let nuclei = spec
        .nuclei
        .iter()
        .enumerate()
        .map(|(j, nu)| embed_spin(&single_spin_operators(nu.spin), 2 + j))
        .collect::<Result<Vec<_>>>()?;

    let exchange = s1.dot_spin(&s2);
    let id = ComplexMatrix::identity(dim);
    let singlet_projector = (&id * 0.25 - &exchange).hermitize();
    let triplet_projector = (&id * 0.75 + &exchange).hermitize();

    debug_assert!(singlet_projector.hermiticity_defect() < 1e-14);
    debug_assert!((singlet_projector.trace().re - n as f64).abs() < 1e-10);

    Ok(SpinOperatorSet {
        dim,
        nuclear_multiplicity: n,
        s1,
        s2,
        nuclei,
        singlet_projector,
        triplet_projector,
    })
}

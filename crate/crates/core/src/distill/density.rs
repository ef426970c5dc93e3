//! Dense density-matrix route for n ≤ 6 pairs, used for Kraus noise and
//! as a cross-check of the branch engine.

use crate::error::{Error, Result};
use crate::hamlib::SpectralHamiltonian;
use crate::linalg::CMat;
use crate::noise::{PauliChannel, apply_local_kraus_alice};
use crate::qcore::state::MAX_DENSITY_PAIRS;
use crate::qcore::{DensityOperator, MeasurementBasis, epr_state};
use crate::twirl::{TimeMeasure, filter_eigenbasis, kron_conjugate};

use super::NoiseModel;

/// Noisy input ρ = (𝒩 ⊗ id)(|Φ+><Φ+|^{⊗n}).
pub fn noisy_epr(noise: &NoiseModel, pauli: Option<&PauliChannel>) -> Result<DensityOperator> {
    let n = noise.n();
    let rho = epr_state(n)?.projector();
    match (pauli, noise) {
        (Some(ch), _) => ch.apply_to_density(&rho),
        (None, NoiseModel::LocalKraus { single, .. }) => {
            let ops = vec![single.operators().to_vec(); n];
            apply_local_kraus_alice(&rho, &ops)
        }
        (None, NoiseModel::Pauli(ch)) => ch.apply_to_density(&rho),
    }
}

/// Returns (survival probability, unnormalized overlap with the kept |Φ+>).
pub fn density_totals(
    h: &SpectralHamiltonian,
    noise: &NoiseModel,
    pauli: Option<&PauliChannel>,
    m: usize,
    basis: &MeasurementBasis,
    mu: &TimeMeasure,
) -> Result<(f64, f64)> {
    let n = h.n();
    if n > MAX_DENSITY_PAIRS {
        return Err(Error::Capacity(format!("density path limited to {MAX_DENSITY_PAIRS} pairs, got {n}")));
    }
    let rho = noisy_epr(noise, pauli)?;
    post_selected_totals(h, &rho.to_block(), m, basis, mu)
}

/// Twirls a block-ordered ρ and evaluates the identical-outcome statistics.
pub fn post_selected_totals(
    h: &SpectralHamiltonian,
    rho_block: &CMat,
    m: usize,
    basis: &MeasurementBasis,
    mu: &TimeMeasure,
) -> Result<(f64, f64)> {
    mu.validate()?;
    let n = h.n();
    let d = h.dim();
    if rho_block.nrows() != d * d {
        return Err(Error::Dimension { expected: d * d, got: rho_block.nrows() });
    }
    let v = h.eigenvectors();
    let vh = v.adjoint().to_owned();
    let mut eig = kron_conjugate(rho_block, &vh, v);
    filter_eigenbasis(&mut eig, h, mu);
    // straight from the eigenbasis to the measurement frame: Vm = W†V
    let vm = basis.rotate_rows(n, m, v)?;
    let out = kron_conjugate(&eig, &vm, &vm.adjoint().to_owned());

    let dk = d >> m;
    let mut survival = 0.0;
    for a in 0..d {
        for b in 0..d {
            if a / dk == b / dk {
                let i = a * d + b;
                survival += out[(i, i)].re;
            }
        }
    }
    let mut overlap = 0.0;
    for x in 0..(1usize << m) {
        for r in 0..dk {
            let i = (x * dk + r) * (d + 1);
            for s in 0..dk {
                let j = (x * dk + s) * (d + 1);
                overlap += out[(i, j)].re;
            }
        }
    }
    Ok((survival, overlap / dk as f64))
}

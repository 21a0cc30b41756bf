//! Deterministic benchmark generators.
//!
//! Three families, all built through the physically realizable template so
//! their full-port dilations have vanishing realizability residuals:
//!
//! * **Oscillator chain** — `n` modes with on-site frequencies `ω_j` and
//!   nearest-neighbour coupling `g I_2`;
//! * **Bosonic Kitaev chain** — same layout with the non-reciprocal
//!   coupling block `[[0, λ+J], [λ-J, 0]]` built from hopping `J` and
//!   pairing `λ`;
//! * **Passive bus** — one damped hub mode star-coupled to nine undamped
//!   ancilla modes through position quadratures.
//!
//! Chains and Kitaev chains carry `m` external input/output channels plus
//! one weak stabilizing channel per site.  The *full-port* model keeps all
//! `m + n` channels and is realizable by construction; the *external* model
//! keeps only the `m` driven channels (its own residual `R1` is therefore
//! nonzero — exactly the situation the full-port monitor exists for).

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg;
use crate::model::{pr_from_template, HamiltonianMatrix, StateSpaceModel};

/// Parameter profile of a chain benchmark.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChainVariant {
    /// Uniform frequencies and site damping.
    Homogeneous,
    /// Site-dependent frequencies and weak site damping.
    Heterogeneous,
}

impl ChainVariant {
    pub fn label(&self) -> &'static str {
        match self {
            ChainVariant::Homogeneous => "homogeneous",
            ChainVariant::Heterogeneous => "heterogeneous",
        }
    }
}

/// Channel attachment sites: both endpoints first, then `m - 2` interior
/// sites at `round(j n / (m-1))`, `j = 1..m-2` (all 1-based site numbers,
/// returned 0-based).  A single channel attaches to the first site.
pub fn attachment_sites(n: usize, m: usize) -> Vec<usize> {
    assert!(n >= 1 && m >= 1);
    if m == 1 {
        return vec![0];
    }
    let mut sites = vec![0, n - 1];
    for j in 1..=(m.saturating_sub(2)) {
        let raw = (j as f64 * n as f64 / (m - 1) as f64).round() as usize;
        sites.push(raw.clamp(1, n) - 1);
    }
    sites
}

/// Oscillator-chain benchmark configuration.  The constructors fill the
/// defaults; every field can be adjusted before building.
#[derive(Debug, Clone)]
pub struct ChainConfig {
    pub n: usize,
    pub m: usize,
    pub variant: ChainVariant,
    /// On-site frequencies `ω_j`, length `n`.
    pub frequencies: Vec<f64>,
    /// Nearest-neighbour coupling strength (the block is `g I_2`).
    pub coupling: f64,
    /// External channel rates `κ_ch`, length `m`.
    pub channel_rates: Vec<f64>,
    /// Per-site stabilizing rates `κ_site`, length `n`.
    pub site_rates: Vec<f64>,
    /// 0-based channel attachment sites, length `m`.
    pub sites: Vec<usize>,
}

impl ChainConfig {
    /// Uniform chain: `ω = 1`, `g = 0.05`, `κ_ch = 1`, `κ_site = 0.2`.
    ///
    /// The weak coupling keeps the dominant dynamics near the driven
    /// endpoints, so low-order reduced models capture the external
    /// transfer to high accuracy across chain lengths.
    pub fn homogeneous(n: usize, m: usize) -> Self {
        Self {
            n,
            m,
            variant: ChainVariant::Homogeneous,
            frequencies: vec![1.0; n],
            coupling: 0.05,
            channel_rates: vec![1.0; m],
            site_rates: vec![0.2; n],
            sites: attachment_sites(n.max(1), m.max(1)),
        }
    }

    /// Disordered chain: `ω_j = 1 + 0.5 j/n`, `κ_site,j = 0.02 (1 + j/n)`
    /// (`j = 1..n`), same coupling and channel rates as the uniform chain.
    pub fn heterogeneous(n: usize, m: usize) -> Self {
        let frequencies = (1..=n).map(|j| 1.0 + 0.5 * j as f64 / n as f64).collect();
        let site_rates = (1..=n).map(|j| 0.02 * (1.0 + j as f64 / n as f64)).collect();
        Self {
            n,
            m,
            variant: ChainVariant::Heterogeneous,
            frequencies,
            coupling: 0.05,
            channel_rates: vec![1.0; m],
            site_rates,
            sites: attachment_sites(n.max(1), m.max(1)),
        }
    }

    fn validate(&self) -> Result<()> {
        validate_lattice(
            self.n,
            self.m,
            &self.frequencies,
            &self.channel_rates,
            &self.site_rates,
            &self.sites,
        )
    }
}

/// Bosonic-Kitaev-chain benchmark configuration.
#[derive(Debug, Clone)]
pub struct BkcConfig {
    pub n: usize,
    pub m: usize,
    pub variant: ChainVariant,
    /// On-site frequencies `ω_j`, length `n`.
    pub frequencies: Vec<f64>,
    /// Hopping magnitude `|J| ≥ 0`.
    pub hopping: f64,
    /// Pairing magnitude `|λ| ≥ 0`.  The coupling block uses
    /// `α = |λ| - |J|` and `β = |λ| + |J|`.  Hopping only shifts mode
    /// frequencies; the pairing sum `α + β = 2|λ|` competes with the
    /// on-site frequency, so the undamped lattice stays marginally
    /// stable for `2|λ| < min ω_j` and the site damping then sets the
    /// stability margin directly.
    pub pairing: f64,
    pub channel_rates: Vec<f64>,
    pub site_rates: Vec<f64>,
    pub sites: Vec<usize>,
}

impl BkcConfig {
    /// Uniform Kitaev chain: `ω = 1`, `|J| = 0.07`, `|λ| = 0.08`, `κ_ch = 1`,
    /// `κ_site = 0.25`.
    pub fn homogeneous(n: usize, m: usize) -> Self {
        Self {
            n,
            m,
            variant: ChainVariant::Homogeneous,
            frequencies: vec![1.0; n],
            hopping: 0.07,
            pairing: 0.08,
            channel_rates: vec![1.0; m],
            site_rates: vec![0.25; n],
            sites: attachment_sites(n.max(1), m.max(1)),
        }
    }

    /// Disordered Kitaev chain: `ω_j = 1 + 0.5 j/n`,
    /// `κ_site,j = 0.03 (1 + j/n)`, same hopping and pairing as uniform.
    pub fn heterogeneous(n: usize, m: usize) -> Self {
        let frequencies = (1..=n).map(|j| 1.0 + 0.5 * j as f64 / n as f64).collect();
        let site_rates = (1..=n).map(|j| 0.03 * (1.0 + j as f64 / n as f64)).collect();
        Self {
            n,
            m,
            variant: ChainVariant::Heterogeneous,
            frequencies,
            hopping: 0.07,
            pairing: 0.08,
            channel_rates: vec![1.0; m],
            site_rates,
            sites: attachment_sites(n.max(1), m.max(1)),
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.hopping >= 0.0) || !(self.pairing >= 0.0) {
            return Err(Error::InvalidConfig(
                "hopping and pairing magnitudes must be nonnegative".into(),
            ));
        }
        validate_lattice(
            self.n,
            self.m,
            &self.frequencies,
            &self.channel_rates,
            &self.site_rates,
            &self.sites,
        )
    }
}

fn validate_lattice(
    n: usize,
    m: usize,
    frequencies: &[f64],
    channel_rates: &[f64],
    site_rates: &[f64],
    sites: &[usize],
) -> Result<()> {
    if n == 0 || m == 0 {
        return Err(Error::InvalidConfig(
            "need at least one site and one channel".into(),
        ));
    }
    if m > n {
        return Err(Error::InvalidConfig(format!(
            "cannot attach {m} channels to {n} sites"
        )));
    }
    if frequencies.len() != n {
        return Err(Error::InvalidConfig(format!(
            "expected {n} frequencies, got {}",
            frequencies.len()
        )));
    }
    if frequencies.iter().any(|w| !(*w > 0.0)) {
        return Err(Error::InvalidConfig(
            "on-site frequencies must be positive".into(),
        ));
    }
    if channel_rates.len() != m {
        return Err(Error::InvalidConfig(format!(
            "expected {m} channel rates, got {}",
            channel_rates.len()
        )));
    }
    if channel_rates.iter().any(|k| !(*k > 0.0)) {
        return Err(Error::InvalidConfig(
            "channel rates must be positive".into(),
        ));
    }
    if site_rates.len() != n {
        return Err(Error::InvalidConfig(format!(
            "expected {n} site rates, got {}",
            site_rates.len()
        )));
    }
    if site_rates.iter().any(|k| !(*k > 0.0)) {
        return Err(Error::InvalidConfig("site rates must be positive".into()));
    }
    if sites.len() != m {
        return Err(Error::InvalidConfig(format!(
            "expected {m} attachment sites, got {}",
            sites.len()
        )));
    }
    if sites.iter().any(|s| *s >= n) {
        return Err(Error::InvalidConfig(
            "attachment sites must index existing sites".into(),
        ));
    }
    Ok(())
}

/// Full-port dilation and its externally driven restriction.
#[derive(Debug, Clone)]
pub struct LatticeModels {
    /// All `m + n` channels; realizable by construction.
    pub full_port: StateSpaceModel,
    /// Only the `m` driven channels; same drift, truncated ports.
    pub external: StateSpaceModel,
    /// Spectral abscissa of the shared drift (strictly negative).
    pub stability_margin: f64,
}

/// Block-tridiagonal Hamiltonian matrix from on-site frequencies and one
/// 2x2 coupling stencil (placed above the diagonal; transposed below).
fn block_tridiagonal(frequencies: &[f64], stencil: [[f64; 2]; 2]) -> DMatrix<f64> {
    let n = frequencies.len();
    let mut r = DMatrix::zeros(2 * n, 2 * n);
    for (j, w) in frequencies.iter().enumerate() {
        r[(2 * j, 2 * j)] = *w;
        r[(2 * j + 1, 2 * j + 1)] = *w;
    }
    for j in 0..n.saturating_sub(1) {
        for p in 0..2 {
            for q in 0..2 {
                r[(2 * j + p, 2 * (j + 1) + q)] = stencil[p][q];
                r[(2 * (j + 1) + q, 2 * j + p)] = stencil[p][q];
            }
        }
    }
    r
}

/// `[B_ch | B_site]` with `B_ch = (S diag(√κ_ch)) ⊗ I_2` and
/// `B_site = diag(√κ_site) ⊗ I_2`.
fn lattice_coupling(
    n: usize,
    sites: &[usize],
    channel_rates: &[f64],
    site_rates: &[f64],
) -> DMatrix<f64> {
    let m = sites.len();
    let mut b = DMatrix::zeros(2 * n, 2 * (m + n));
    for (l, (site, rate)) in sites.iter().zip(channel_rates).enumerate() {
        let g = rate.sqrt();
        b[(2 * site, 2 * l)] = g;
        b[(2 * site + 1, 2 * l + 1)] = g;
    }
    for (j, rate) in site_rates.iter().enumerate() {
        let g = rate.sqrt();
        b[(2 * j, 2 * (m + j))] = g;
        b[(2 * j + 1, 2 * (m + j) + 1)] = g;
    }
    b
}

fn build_lattice(
    n: usize,
    m: usize,
    r: DMatrix<f64>,
    sites: &[usize],
    channel_rates: &[f64],
    site_rates: &[f64],
) -> Result<LatticeModels> {
    let hamiltonian = HamiltonianMatrix::new(r)?;
    let b_tot = lattice_coupling(n, sites, channel_rates, site_rates);
    let full_port = pr_from_template(&hamiltonian, b_tot)?;

    let stability_margin = linalg::spectral_abscissa(full_port.a())?;
    if stability_margin >= 0.0 {
        return Err(Error::Unstable {
            margin: stability_margin,
        });
    }

    let external = StateSpaceModel::new(
        full_port.a().clone(),
        full_port.b().columns(0, 2 * m).into_owned(),
        full_port.c().rows(0, 2 * m).into_owned(),
        DMatrix::identity(2 * m, 2 * m),
    )?;
    Ok(LatticeModels {
        full_port,
        external,
        stability_margin,
    })
}

/// Builds the oscillator-chain benchmark.
pub fn build_chain(config: &ChainConfig) -> Result<LatticeModels> {
    config.validate()?;
    let g = config.coupling;
    let r = block_tridiagonal(&config.frequencies, [[g, 0.0], [0.0, g]]);
    build_lattice(
        config.n,
        config.m,
        r,
        &config.sites,
        &config.channel_rates,
        &config.site_rates,
    )
}

/// Builds the bosonic-Kitaev-chain benchmark.  The coupling block is
/// `[[0, λ+J], [λ-J, 0]]`: hopping `J` and pairing `λ` enter only through
/// the combinations `α = λ - J` (slow) and `β = λ + J` (fast).
pub fn build_bkc(config: &BkcConfig) -> Result<LatticeModels> {
    config.validate()?;
    let alpha = config.pairing - config.hopping;
    let beta = config.pairing + config.hopping;
    let r = block_tridiagonal(&config.frequencies, [[0.0, beta], [alpha, 0.0]]);
    build_lattice(
        config.n,
        config.m,
        r,
        &config.sites,
        &config.channel_rates,
        &config.site_rates,
    )
}

/// Passive-bus benchmark configuration: one damped hub mode star-coupled
/// through position quadratures to nine undamped ancilla modes.
#[derive(Debug, Clone)]
pub struct BusConfig {
    /// Hub damping rate `γ`.
    pub gamma: f64,
    /// Hub frequency `ω_0`.
    pub hub_frequency: f64,
    /// Ancilla frequencies `ω_j`.
    pub ancilla_frequencies: Vec<f64>,
    /// Hub–ancilla coupling strengths `κ_j`, applied to both quadrature
    /// pairs (nonnegative; zero decouples an ancilla).
    pub couplings: Vec<f64>,
}

impl Default for BusConfig {
    fn default() -> Self {
        Self {
            gamma: 2.2,
            hub_frequency: 1.0,
            ancilla_frequencies: vec![4.18, 3.28, 2.42, 2.28, 1.75, 1.61, 1.55, 1.40, 1.20],
            couplings: vec![0.95, 0.78, 0.66, 0.58, 0.44, 0.31, 0.22, 0.14, 0.08],
        }
    }
}

impl BusConfig {
    fn validate(&self) -> Result<()> {
        if !(self.gamma > 0.0) {
            return Err(Error::InvalidConfig("hub damping must be positive".into()));
        }
        if !(self.hub_frequency > 0.0) {
            return Err(Error::InvalidConfig(
                "hub frequency must be positive".into(),
            ));
        }
        if self.ancilla_frequencies.len() != self.couplings.len() {
            return Err(Error::InvalidConfig(format!(
                "{} ancilla frequencies for {} couplings",
                self.ancilla_frequencies.len(),
                self.couplings.len()
            )));
        }
        if self.ancilla_frequencies.is_empty() {
            return Err(Error::InvalidConfig(
                "bus needs at least one ancilla mode".into(),
            ));
        }
        if self.ancilla_frequencies.iter().any(|w| !(*w > 0.0)) {
            return Err(Error::InvalidConfig(
                "ancilla frequencies must be positive".into(),
            ));
        }
        if self.couplings.iter().any(|k| !(*k >= 0.0)) {
            return Err(Error::InvalidConfig(
                "couplings must be nonnegative".into(),
            ));
        }
        Ok(())
    }
}

/// Builds the passive-bus benchmark (a single driven channel on the hub).
/// The model is realizable as it stands, so it is its own monitor.  A
/// coupling of zero leaves the matching ancilla marginally stable, which
/// is allowed; a strictly unstable drift is rejected.
pub fn build_bus(config: &BusConfig) -> Result<StateSpaceModel> {
    config.validate()?;
    let n = 1 + config.ancilla_frequencies.len();
    let mut r = DMatrix::zeros(2 * n, 2 * n);
    r[(0, 0)] = config.hub_frequency;
    r[(1, 1)] = config.hub_frequency;
    for (j, (w, k)) in config
        .ancilla_frequencies
        .iter()
        .zip(&config.couplings)
        .enumerate()
    {
        let s = 2 * (j + 1);
        r[(s, s)] = *w;
        r[(s + 1, s + 1)] = *w;
        // Excitation-preserving star coupling to the hub: κ_j on both
        // quadrature pairs, so the hub exchanges quanta with each ancilla.
        r[(0, s)] = *k;
        r[(s, 0)] = *k;
        r[(1, s + 1)] = *k;
        r[(s + 1, 1)] = *k;
    }
    let mut b = DMatrix::zeros(2 * n, 2);
    let g = config.gamma.sqrt();
    b[(0, 0)] = g;
    b[(1, 1)] = g;

    let model = pr_from_template(&HamiltonianMatrix::new(r)?, b)?;
    let margin = linalg::spectral_abscissa(model.a())?;
    if margin > 0.0 {
        return Err(Error::Unstable { margin });
    }
    Ok(model)
}

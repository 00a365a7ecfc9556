//! Discrete mode grids for time-domain evolution.

use std::hash::Hasher;

use crate::error::{Error, Result};
use crate::num::{lit, to_f64, Real};
use crate::quadrature::gauss_legendre;

/// Content hash of a mode grid; two branch amplitude lists may only be
/// combined when their grid identities match.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GridId(pub u64);

impl std::fmt::Display for GridId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{:016x}", self.0)
    }
}

/// 64-bit FNV-1a, enough to tell grids apart.
struct Fnv(u64);

impl Hasher for Fnv {
    fn finish(&self) -> u64 {
        self.0
    }

    fn write(&mut self, bytes: &[u8]) {
        for b in bytes {
            self.0 ^= u64::from(*b);
            self.0 = self.0.wrapping_mul(0x0100_0000_01b3);
        }
    }
}

/// How to build a Gauss–Legendre mode grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    /// Legendre nodes in every panel.
    pub nodes_per_panel: usize,
    /// The grid stops where ĥ(k)² drops below this value.
    pub suppression: f64,
    /// Panels wider than this are split; resolves dephasing of free
    /// oscillations over long horizons (≈ 2π / horizon).
    pub max_panel_width: Option<f64>,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            nodes_per_panel: 12,
            suppression: 1e-8,
            max_panel_width: None,
        }
    }
}

impl GridSpec {
    pub fn with_max_panel_width(mut self, width: f64) -> Self {
        self.max_panel_width = Some(width);
        self
    }

    pub fn with_nodes_per_panel(mut self, n: usize) -> Self {
        self.nodes_per_panel = n;
        self
    }
}

/// Momenta and quadrature weights covering the full line.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeGrid<T> {
    k: Vec<T>,
    weights: Vec<T>,
    id: GridId,
}

impl<T: Real> ModeGrid<T> {
    /// Grid from explicit nodes; `k` strictly increasing, weights positive.
    pub fn from_nodes(k: Vec<T>, weights: Vec<T>) -> Result<Self> {
        if k.is_empty() {
            return Err(Error::InvalidParameter("mode grid is empty".into()));
        }
        if k.len() != weights.len() {
            return Err(Error::Shape(format!("{} nodes but {} weights", k.len(), weights.len())));
        }
        if k.iter().any(|x| !x.is_finite()) || k.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidParameter(
                "mode momenta must be finite and strictly increasing".into(),
            ));
        }
        if weights.iter().any(|w| !(*w > T::zero()) || !w.is_finite()) {
            return Err(Error::InvalidParameter("quadrature weights must be positive".into()));
        }
        let mut h = Fnv(0xcbf2_9ce4_8422_2325);
        for (a, b) in k.iter().zip(&weights) {
            h.write_u64(to_f64(*a).to_bits());
            h.write_u64(to_f64(*b).to_bits());
        }
        let id = GridId(h.finish());
        Ok(Self { k, weights, id })
    }

    /// Composite Gauss–Legendre grid on `[-k_max, k_max]`.
    ///
    /// Panel edges sit at `0, m, 2m, 4m, ...` so the knee of ω_k at k ≈ m is
    /// resolved, the last edge being `k_max`. The positive half is mirrored.
    pub fn gauss_legendre(mass: T, k_max: T, spec: &GridSpec) -> Result<Self> {
        if !(mass > T::zero()) || !(k_max > T::zero()) {
            return Err(Error::InvalidParameter("grid needs positive mass and extent".into()));
        }
        if spec.nodes_per_panel == 0 {
            return Err(Error::InvalidParameter("need at least one node per panel".into()));
        }
        let mut edges = vec![T::zero()];
        let mut e = mass;
        while e < k_max {
            edges.push(e);
            e = e + e;
        }
        edges.push(k_max);
        if let Some(width) = spec.max_panel_width {
            if !(width > 0.0) {
                return Err(Error::InvalidParameter("max panel width must be positive".into()));
            }
            let width: T = lit(width);
            let mut refined = vec![T::zero()];
            for w in edges.windows(2) {
                let n = ((w[1] - w[0]) / width).ceil().to_usize().unwrap_or(1).max(1);
                let step = (w[1] - w[0]) / T::from_usize(n).unwrap();
                for j in 1..n {
                    refined.push(w[0] + step * T::from_usize(j).unwrap());
                }
                refined.push(w[1]);
            }
            edges = refined;
        }

        let (x, w) = gauss_legendre(spec.nodes_per_panel);
        let half = lit::<T>(0.5);
        let mut pos_k = Vec::with_capacity(x.len() * edges.len());
        let mut pos_w = Vec::with_capacity(x.len() * edges.len());
        for p in edges.windows(2) {
            let mid = half * (p[0] + p[1]);
            let len = half * (p[1] - p[0]);
            for (xi, wi) in x.iter().zip(&w) {
                pos_k.push(mid + len * lit(*xi));
                pos_w.push(len * lit(*wi));
            }
        }
        let mut k: Vec<T> = pos_k.iter().rev().map(|v| -*v).collect();
        k.extend_from_slice(&pos_k);
        let mut weights: Vec<T> = pos_w.iter().rev().copied().collect();
        weights.extend_from_slice(&pos_w);
        Self::from_nodes(k, weights)
    }

    pub fn len(&self) -> usize {
        self.k.len()
    }

    pub fn is_empty(&self) -> bool {
        self.k.is_empty()
    }

    pub fn k(&self) -> &[T] {
        &self.k
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn id(&self) -> GridId {
        self.id
    }

    /// Largest |k| on the grid.
    pub fn k_max(&self) -> T {
        self.k.iter().fold(T::zero(), |m, v| m.max(v.abs()))
    }

    /// Weighted sum Σ w_k f(k).
    pub fn sum<F: Fn(T) -> T>(&self, f: F) -> T {
        self.k.iter().zip(&self.weights).map(|(k, w)| *w * f(*k)).sum()
    }
}

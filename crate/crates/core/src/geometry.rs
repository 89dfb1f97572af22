//! Array configuration, subarray placement and steering vectors.
//!
//! The transmit array is a set of `u` movable subarrays on the x–z plane
//! (y ≡ 0). Each subarray is an `n × n` UPA with element spacing `d_x`, `d_z`.
//! The full transmit response has the two-level Kronecker form
//! `a_t = a_sub ⊗ a_elem`, where `a_sub` carries one phase per subarray
//! position and `a_elem = a_elem,x ⊗ a_elem,z` is shared by all subarrays.
//!
//! Global element index is `sub * n² + ix * n + iz`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{cis, CVector};

/// Speed of light in m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Relative slack applied when comparing distances against `d_min`.
const SPACING_RTOL: f64 = 1e-12;

/// Static description of the transmit and receive arrays.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArrayConfig {
    /// Total transmit elements.
    pub m_t: usize,
    /// Number of subarrays (equal to the number of RF chains).
    pub u: usize,
    /// Elements per subarray side.
    pub n: usize,
    /// Carrier wavelength in meters.
    pub lambda: f64,
    pub d_x: f64,
    pub d_z: f64,
    /// Extra inter-subarray spacing in meters.
    pub l_s: f64,
    /// Base height in meters.
    pub h_t: f64,
    /// Receive elements per user.
    pub n_r: usize,
    /// Movable-region side length in wavelengths.
    pub region_len: f64,
    /// Minimum inter-subarray center distance in meters.
    pub d_min: f64,
}

impl ArrayConfig {
    /// Builds a configuration with half-wavelength element spacing,
    /// `l_s = λ/2`, `h_t = 0`, two receive elements, a 12λ region and
    /// `d_min` equal to the nominal spacing.
    pub fn new(m_t: usize, u: usize, lambda: f64) -> Result<Self> {
        if u == 0 || m_t == 0 || !m_t.is_multiple_of(u) {
            return Err(Error::InvalidConfig(format!(
                "m_t = {m_t} is not a positive multiple of u = {u}"
            )));
        }
        let per_sub = m_t / u;
        let n = (per_sub as f64).sqrt().round() as usize;
        if n * n != per_sub {
            return Err(Error::InvalidConfig(format!(
                "m_t / u = {per_sub} is not a perfect square"
            )));
        }
        let mut cfg = ArrayConfig {
            m_t,
            u,
            n,
            lambda,
            d_x: lambda / 2.0,
            d_z: lambda / 2.0,
            l_s: lambda / 2.0,
            h_t: 0.0,
            n_r: 2,
            region_len: 12.0,
            d_min: 0.0,
        };
        cfg.d_min = cfg.nominal_spacing();
        cfg.validate()?;
        Ok(cfg)
    }

    /// Same as [`ArrayConfig::new`] with `λ = c / f`.
    pub fn at_carrier(m_t: usize, u: usize, carrier_hz: f64) -> Result<Self> {
        Self::new(m_t, u, SPEED_OF_LIGHT / carrier_hz)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if self.u == 0 || !self.m_t.is_multiple_of(self.u) {
            return bad(format!("m_t = {} not divisible by u = {}", self.m_t, self.u));
        }
        if self.n * self.n != self.m_t / self.u {
            return bad(format!(
                "n = {} does not match m_t / u = {}",
                self.n,
                self.m_t / self.u
            ));
        }
        if !(self.lambda > 0.0) || !(self.d_x > 0.0) || !(self.d_z > 0.0) {
            return bad("wavelength and element spacings must be positive".into());
        }
        if self.l_s < 0.0 || !self.h_t.is_finite() {
            return bad("l_s must be non-negative and h_t finite".into());
        }
        if self.n_r == 0 {
            return bad("n_r must be at least 1".into());
        }
        if !(self.region_len > 0.0) {
            return bad(format!("region_len must be positive, got {}", self.region_len));
        }
        if !(self.d_min > 0.0) {
            return bad(format!("d_min must be positive, got {}", self.d_min));
        }
        Ok(())
    }

    /// Elements per subarray, `m_t / u = n²`.
    pub fn elements_per_subarray(&self) -> usize {
        self.n * self.n
    }

    /// Nominal subarray pitch `l = (n − 1)λ/2 + l_s`.
    pub fn nominal_spacing(&self) -> f64 {
        (self.n as f64 - 1.0) * self.lambda / 2.0 + self.l_s
    }

    /// Grid of subarray slots `(columns along x, rows along z)`.
    ///
    /// Square `u` gives a `√u × √u` grid; otherwise `⌈√u⌉ × ⌈u / ⌈√u⌉⌉`.
    pub fn grid_dims(&self) -> (usize, usize) {
        let gx = ((self.u as f64).sqrt().ceil() as usize).max(1);
        let gz = self.u.div_ceil(gx);
        (gx, gz)
    }

    /// Grid slot `(u_x, u_z)` (zero-based) of subarray `idx`.
    pub fn grid_slot(&self, idx: usize) -> (usize, usize) {
        let (gx, _) = self.grid_dims();
        (idx % gx, idx / gx)
    }

    /// Side length of the movable square in meters.
    pub fn region_side(&self) -> f64 {
        self.region_len * self.lambda
    }
}

/// A subarray reference position on the x–z plane, in meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Position {
    pub x: f64,
    pub z: f64,
}

impl Position {
    pub fn new(x: f64, z: f64) -> Self {
        Position { x, z }
    }

    pub fn distance(&self, other: &Position) -> f64 {
        (self.x - other.x).hypot(self.z - other.z)
    }
}

/// Axis-aligned rectangle on the x–z plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub x_min: f64,
    pub x_max: f64,
    pub z_min: f64,
    pub z_max: f64,
}

impl Rect {
    pub fn point(p: Position) -> Self {
        Rect {
            x_min: p.x,
            x_max: p.x,
            z_min: p.z,
            z_max: p.z,
        }
    }

    pub fn contains(&self, p: Position) -> bool {
        p.x >= self.x_min && p.x <= self.x_max && p.z >= self.z_min && p.z <= self.z_max
    }

    pub fn clamp(&self, p: Position) -> Position {
        Position {
            x: p.x.clamp(self.x_min, self.x_max),
            z: p.z.clamp(self.z_min, self.z_max),
        }
    }

    pub fn width(&self) -> f64 {
        self.x_max - self.x_min
    }

    pub fn height(&self) -> f64 {
        self.z_max - self.z_min
    }

    pub fn center(&self) -> Position {
        Position::new(
            0.5 * (self.x_min + self.x_max),
            0.5 * (self.z_min + self.z_max),
        )
    }

    pub fn is_point(&self) -> bool {
        self.width() == 0.0 && self.height() == 0.0
    }

    /// Shrinks by `margin` on every side. Negative extents collapse to the center.
    pub fn shrink(&self, margin: f64) -> Rect {
        let c = self.center();
        let (x_min, x_max) = if self.width() > 2.0 * margin * (1.0 + SPACING_RTOL) {
            (self.x_min + margin, self.x_max - margin)
        } else {
            (c.x, c.x)
        };
        let (z_min, z_max) = if self.height() > 2.0 * margin * (1.0 + SPACING_RTOL) {
            (self.z_min + margin, self.z_max - margin)
        } else {
            (c.z, c.z)
        };
        Rect {
            x_min,
            x_max,
            z_min,
            z_max,
        }
    }

    /// True when the open interiors overlap.
    pub fn overlaps(&self, other: &Rect) -> bool {
        self.x_min < other.x_max
            && other.x_min < self.x_max
            && self.z_min < other.z_max
            && other.z_min < self.z_max
    }
}

/// Subarray positions and the rectangle each subarray is confined to.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubarrayLayout {
    pub positions: Vec<Position>,
    pub subregions: Vec<Rect>,
}

impl SubarrayLayout {
    /// Layout with every subarray pinned to its current position.
    pub fn fixed(positions: Vec<Position>) -> Self {
        let subregions = positions.iter().copied().map(Rect::point).collect();
        SubarrayLayout {
            positions,
            subregions,
        }
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    /// Every position lies inside its own subregion.
    pub fn is_confined(&self) -> bool {
        self.positions.len() == self.subregions.len()
            && self
                .positions
                .iter()
                .zip(&self.subregions)
                .all(|(p, r)| r.contains(*p))
    }

    /// Copy of the layout with every position shifted by `(dx, dz)`.
    pub fn translated(&self, dx: f64, dz: f64) -> Self {
        let shift = |p: &Position| Position::new(p.x + dx, p.z + dz);
        SubarrayLayout {
            positions: self.positions.iter().map(shift).collect(),
            subregions: self
                .subregions
                .iter()
                .map(|r| Rect {
                    x_min: r.x_min + dx,
                    x_max: r.x_max + dx,
                    z_min: r.z_min + dz,
                    z_max: r.z_max + dz,
                })
                .collect(),
        }
    }
}

/// Which level of the array a steering vector describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ResponseLevel {
    Element,
    Subarray,
    FullTx,
    Rx,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SteeringVector {
    pub entries: CVector,
    pub level: ResponseLevel,
}

impl SteeringVector {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Unit propagation direction for elevation `theta` and azimuth `phi`.
pub fn wave_vector(theta: f64, phi: f64) -> [f64; 3] {
    let (st, ct) = theta.sin_cos();
    let (sp, cp) = phi.sin_cos();
    [st * cp, st * sp, ct]
}

fn linear_response(n: usize, spacing: f64, direction: f64, lambda: f64) -> CVector {
    let norm = 1.0 / (n as f64).sqrt();
    let step = 2.0 * PI / lambda * spacing * direction;
    CVector::from_fn(n, |i, _| cis(step * i as f64) * norm)
}

/// Element-level response `a_elem,x ⊗ a_elem,z`, length `n²`, unit norm.
pub fn elem_response(theta: f64, phi: f64, cfg: &ArrayConfig) -> SteeringVector {
    let k = wave_vector(theta, phi);
    let ax = linear_response(cfg.n, cfg.d_x, k[0], cfg.lambda);
    let az = linear_response(cfg.n, cfg.d_z, k[2], cfg.lambda);
    SteeringVector {
        entries: ax.kronecker(&az),
        level: ResponseLevel::Element,
    }
}

/// Phase of a plane wave from `(theta, phi)` at `pos`, `(2π/λ) kᵀm`.
pub fn subarray_phase(k: &[f64; 3], pos: Position, lambda: f64) -> f64 {
    2.0 * PI / lambda * (k[0] * pos.x + k[2] * pos.z)
}

/// Subarray-level response, one unit-modulus entry per subarray position.
pub fn sub_response(theta: f64, phi: f64, layout: &SubarrayLayout, cfg: &ArrayConfig) -> SteeringVector {
    let k = wave_vector(theta, phi);
    let entries = CVector::from_iterator(
        layout.positions.len(),
        layout
            .positions
            .iter()
            .map(|&p| cis(subarray_phase(&k, p, cfg.lambda))),
    );
    SteeringVector {
        entries,
        level: ResponseLevel::Subarray,
    }
}

/// Full transmit response `a_sub ⊗ a_elem`, length `m_t`, squared norm `u`.
pub fn tx_response(theta: f64, phi: f64, layout: &SubarrayLayout, cfg: &ArrayConfig) -> SteeringVector {
    let sub = sub_response(theta, phi, layout, cfg);
    let elem = elem_response(theta, phi, cfg);
    SteeringVector {
        entries: sub.entries.kronecker(&elem.entries),
        level: ResponseLevel::FullTx,
    }
}

/// Receive response of an `n_r`-element ULA along x with λ/2 spacing, unit norm.
pub fn rx_response(theta: f64, phi: f64, cfg: &ArrayConfig) -> SteeringVector {
    let k = wave_vector(theta, phi);
    SteeringVector {
        entries: linear_response(cfg.n_r, cfg.lambda / 2.0, k[0], cfg.lambda),
        level: ResponseLevel::Rx,
    }
}

fn nominal_positions(cfg: &ArrayConfig) -> Vec<Position> {
    let l = cfg.nominal_spacing();
    (0..cfg.u)
        .map(|idx| {
            let (ux, uz) = cfg.grid_slot(idx);
            Position::new(ux as f64 * l, cfg.h_t + uz as f64 * l)
        })
        .collect()
}

/// Nominal fixed-position layout: `x_u = (u_x − 1) l`, `z_u = h_t + (u_z − 1) l`.
///
/// Every subregion is the single point at the nominal position.
pub fn initial_layout(cfg: &ArrayConfig) -> Result<SubarrayLayout> {
    let positions = nominal_positions(cfg);
    if let Some(distance) = min_pairwise_distance(&positions) {
        if !spacing_ok(distance, cfg.d_min) {
            return Err(Error::SpacingViolation {
                distance,
                d_min: cfg.d_min,
            });
        }
    }
    Ok(SubarrayLayout::fixed(positions))
}

/// Partitions the movable square into one tile per grid slot and shrinks each
/// tile by `d_min / 2` per side.
///
/// The square has side `region_len · λ` and is centered on the nominal grid.
/// Points taken from distinct shrunk tiles are at least `d_min` apart.
pub fn partition_regions(cfg: &ArrayConfig) -> Result<Vec<Rect>> {
    let (gx, gz) = cfg.grid_dims();
    let side = cfg.region_side();
    let l = cfg.nominal_spacing();
    let cx = (gx as f64 - 1.0) * l / 2.0;
    let cz = cfg.h_t + (gz as f64 - 1.0) * l / 2.0;
    let pitch_x = side / gx as f64;
    let pitch_z = side / gz as f64;
    let tile = pitch_x.min(pitch_z);
    if cfg.u > 1 && tile < cfg.d_min * (1.0 - SPACING_RTOL) {
        return Err(Error::RegionTooSmall {
            tile,
            d_min: cfg.d_min,
        });
    }
    let x0 = cx - side / 2.0;
    let z0 = cz - side / 2.0;
    let margin = cfg.d_min / 2.0;
    Ok((0..cfg.u)
        .map(|idx| {
            let (ux, uz) = cfg.grid_slot(idx);
            Rect {
                x_min: x0 + ux as f64 * pitch_x,
                x_max: x0 + (ux + 1) as f64 * pitch_x,
                z_min: z0 + uz as f64 * pitch_z,
                z_max: z0 + (uz + 1) as f64 * pitch_z,
            }
            .shrink(margin)
        })
        .collect())
}

/// Movable starting layout: nominal positions clipped into their shrunk tiles.
pub fn movable_layout(cfg: &ArrayConfig) -> Result<SubarrayLayout> {
    let subregions = partition_regions(cfg)?;
    let positions = nominal_positions(cfg)
        .into_iter()
        .zip(&subregions)
        .map(|(p, r)| r.clamp(p))
        .collect();
    Ok(SubarrayLayout {
        positions,
        subregions,
    })
}

fn min_pairwise_distance(positions: &[Position]) -> Option<f64> {
    let mut best: Option<f64> = None;
    for (i, a) in positions.iter().enumerate() {
        for b in &positions[i + 1..] {
            let d = a.distance(b);
            best = Some(best.map_or(d, |m| m.min(d)));
        }
    }
    best
}

fn spacing_ok(distance: f64, d_min: f64) -> bool {
    distance >= d_min * (1.0 - SPACING_RTOL)
}

/// True iff every pairwise distance is at least `d_min` (boundary inclusive).
pub fn validate_spacing(layout: &SubarrayLayout, d_min: f64) -> bool {
    min_pairwise_distance(&layout.positions).is_none_or(|d| spacing_ok(d, d_min))
}

//! Geometric multipath downlink channel with joint clusters.
//!
//! Every user sees the same `P` departure angles, so the `K x M` channel
//! factors as `H = G * A` with `G` the `K x P` path gains and `A` the `P x M`
//! matrix of uniform-linear-array steering vectors. Hence `rank(H) <= P`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix};
use crate::random::complex_normal_matrix;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArrayGeometry {
    num_antennas: usize,
    spacing_ratio: f64,
}

impl ArrayGeometry {
    /// `spacing_ratio` is antenna spacing over carrier wavelength.
    pub fn new(num_antennas: usize, spacing_ratio: f64) -> Result<Self> {
        if num_antennas == 0 {
            return Err(Error::InvalidParameter("array needs at least one antenna".into()));
        }
        if !(spacing_ratio > 0.0 && spacing_ratio.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "antenna spacing ratio must be positive and finite, got {spacing_ratio}"
            )));
        }
        Ok(Self {
            num_antennas,
            spacing_ratio,
        })
    }

    pub fn num_antennas(&self) -> usize {
        self.num_antennas
    }

    pub fn spacing_ratio(&self) -> f64 {
        self.spacing_ratio
    }
}

/// How path departure angles are chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AodMode {
    /// `theta_p = -pi/2 + (p - 1) * pi / P`.
    #[default]
    Grid,
    /// i.i.d. uniform on `[-pi/2, pi/2)`.
    Random,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AodGrid {
    angles: Vec<f64>,
}

impl AodGrid {
    pub fn from_angles(angles: Vec<f64>) -> Result<Self> {
        if angles.is_empty() {
            return Err(Error::InvalidParameter("need at least one path".into()));
        }
        if let Some(bad) = angles.iter().find(|a| !(-PI / 2.0..PI / 2.0).contains(*a)) {
            return Err(Error::InvalidParameter(format!("angle {bad} outside [-pi/2, pi/2)")));
        }
        Ok(Self { angles })
    }

    pub fn num_paths(&self) -> usize {
        self.angles.len()
    }

    pub fn angles(&self) -> &[f64] {
        &self.angles
    }
}

pub fn make_aod_grid(num_paths: usize) -> Result<AodGrid> {
    if num_paths == 0 {
        return Err(Error::InvalidParameter("need at least one path".into()));
    }
    let step = PI / num_paths as f64;
    let angles = (0..num_paths).map(|p| -PI / 2.0 + p as f64 * step).collect();
    AodGrid::from_angles(angles)
}

pub fn random_aods<R: Rng + ?Sized>(num_paths: usize, rng: &mut R) -> Result<AodGrid> {
    if num_paths == 0 {
        return Err(Error::InvalidParameter("need at least one path".into()));
    }
    let angles = (0..num_paths).map(|_| rng.random_range(-PI / 2.0..PI / 2.0)).collect();
    AodGrid::from_angles(angles)
}

/// ULA response; entry `m` is `exp(-j 2 pi (D/lambda) m cos(theta))`.
pub fn steering_vector(theta: f64, geometry: &ArrayGeometry) -> Vec<Complex64> {
    let phase = -2.0 * PI * geometry.spacing_ratio * theta.cos();
    (0..geometry.num_antennas)
        .map(|m| Complex64::from_polar(1.0, phase * m as f64))
        .collect()
}

/// `P x M` matrix whose rows are the steering vectors of the grid angles.
pub fn steering_matrix(grid: &AodGrid, geometry: &ArrayGeometry) -> CMatrix {
    let rows: Vec<Vec<Complex64>> = grid.angles.iter().map(|&t| steering_vector(t, geometry)).collect();
    CMatrix::from_fn(grid.num_paths(), geometry.num_antennas, |p, m| rows[p][m])
}

/// `K x P` matrix of i.i.d. CN(0, 1) path gains.
pub fn gen_gain_matrix<R: Rng + ?Sized>(num_users: usize, num_paths: usize, rng: &mut R) -> Result<CMatrix> {
    if num_users == 0 || num_paths == 0 {
        return Err(Error::InvalidParameter(format!(
            "gain matrix needs K, P >= 1 (got K={num_users}, P={num_paths})"
        )));
    }
    Ok(complex_normal_matrix(rng, num_users, num_paths, 1.0))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelScene {
    grid: AodGrid,
    geometry: ArrayGeometry,
    gains: CMatrix,
    steering: CMatrix,
    channel: CMatrix,
}

impl ChannelScene {
    pub fn num_users(&self) -> usize {
        self.channel.nrows()
    }

    pub fn num_antennas(&self) -> usize {
        self.channel.ncols()
    }

    pub fn grid(&self) -> &AodGrid {
        &self.grid
    }

    pub fn geometry(&self) -> &ArrayGeometry {
        &self.geometry
    }

    pub fn gains(&self) -> &CMatrix {
        &self.gains
    }

    pub fn steering(&self) -> &CMatrix {
        &self.steering
    }

    /// The `K x M` downlink channel `H`.
    pub fn channel(&self) -> &CMatrix {
        &self.channel
    }

    pub fn into_channel(self) -> CMatrix {
        self.channel
    }

    /// Numerical rank of `H` (see [`linalg::numerical_rank`]).
    pub fn numerical_rank(&self) -> Result<usize> {
        linalg::numerical_rank(&self.channel)
    }
}

pub fn assemble_channel(gains: CMatrix, grid: AodGrid, geometry: ArrayGeometry) -> Result<ChannelScene> {
    if gains.ncols() != grid.num_paths() {
        return Err(Error::dims(
            "assemble_channel (gain columns vs paths)",
            grid.num_paths(),
            gains.ncols(),
        ));
    }
    if gains.nrows() == 0 {
        return Err(Error::InvalidParameter("need at least one user".into()));
    }
    let steering = steering_matrix(&grid, &geometry);
    let channel = &gains * &steering;
    Ok(ChannelScene {
        grid,
        geometry,
        gains,
        steering,
        channel,
    })
}

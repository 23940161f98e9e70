//! Downlink training and analog uplink feedback.
//!
//! Users observe `Y = H Phi + N` over `T` channel uses and forward `Y`
//! unprocessed; the base station receives `Z = Q Y + W` and inverts the known
//! uplink channel to obtain `Y_hat = (Q^H Q)^-1 Q^H Z`.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix};
use crate::random::complex_normal_matrix;

/// Signal-to-noise ratio of one link.
///
/// The ratio is per-entry average signal power over per-entry noise power,
/// where signal power is measured on the realized noiseless signal matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Snr {
    Db(f64),
    Noiseless,
}

impl Snr {
    /// Noise variance per entry for a signal of the given mean entry power.
    fn noise_variance(self, signal_power: f64) -> Result<f64> {
        match self {
            Snr::Noiseless => Ok(0.0),
            Snr::Db(db) => {
                if !db.is_finite() {
                    return Err(Error::InvalidParameter(format!("SNR must be finite, got {db} dB")));
                }
                if signal_power == 0.0 {
                    return Err(Error::UndefinedSnr);
                }
                Ok(signal_power / 10f64.powf(db / 10.0))
            }
        }
    }
}

impl fmt::Display for Snr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Snr::Db(db) => write!(f, "{db}"),
            Snr::Noiseless => f.write_str("inf"),
        }
    }
}

impl FromStr for Snr {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if matches!(s.to_ascii_lowercase().as_str(), "inf" | "+inf" | "infinity" | "noiseless") {
            return Ok(Snr::Noiseless);
        }
        match s.parse::<f64>() {
            Ok(db) if db.is_finite() => Ok(Snr::Db(db)),
            _ => Err(Error::InvalidParameter(format!("cannot parse SNR '{s}'"))),
        }
    }
}

/// `M x T` downlink training matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct PilotMatrix {
    phi: CMatrix,
    per_use_power: f64,
}

impl PilotMatrix {
    pub fn new(phi: CMatrix, per_use_power: f64) -> Result<Self> {
        if phi.nrows() == 0 || phi.ncols() == 0 {
            return Err(Error::InvalidParameter("pilot matrix must be non-empty".into()));
        }
        if per_use_power.is_nan() || per_use_power <= 0.0 {
            return Err(Error::InvalidParameter("per-use pilot power must be positive".into()));
        }
        Ok(Self { phi, per_use_power })
    }

    pub fn phi(&self) -> &CMatrix {
        &self.phi
    }

    pub fn per_use_power(&self) -> f64 {
        self.per_use_power
    }

    pub fn num_antennas(&self) -> usize {
        self.phi.nrows()
    }

    pub fn num_uses(&self) -> usize {
        self.phi.ncols()
    }

    /// Mean squared column norm.
    pub fn empirical_power(&self) -> f64 {
        linalg::frobenius_sq(&self.phi) / self.phi.ncols() as f64
    }
}

/// i.i.d. CN(0, 1/M) pilots: unit expected transmit power per channel use.
pub fn gen_pilot_matrix<R: Rng + ?Sized>(num_antennas: usize, num_uses: usize, rng: &mut R) -> Result<PilotMatrix> {
    if num_antennas == 0 || num_uses == 0 {
        return Err(Error::InvalidParameter(format!(
            "pilot matrix needs M, T >= 1 (got M={num_antennas}, T={num_uses})"
        )));
    }
    let phi = complex_normal_matrix(rng, num_antennas, num_uses, 1.0 / num_antennas as f64);
    PilotMatrix::new(phi, 1.0)
}

fn add_noise<R: Rng + ?Sized>(signal: CMatrix, snr: Snr, rng: &mut R) -> Result<(CMatrix, f64)> {
    let (rows, cols) = signal.shape();
    let power = linalg::frobenius_sq(&signal) / (rows * cols) as f64;
    let variance = snr.noise_variance(power)?;
    if variance == 0.0 {
        return Ok((signal, 0.0));
    }
    let noise = complex_normal_matrix(rng, rows, cols, variance);
    Ok((signal + noise, variance.sqrt()))
}

/// `Y = H Phi + N`; returns `Y` and the noise standard deviation per entry.
pub fn downlink_observe<R: Rng + ?Sized>(
    channel: &CMatrix,
    pilots: &PilotMatrix,
    snr: Snr,
    rng: &mut R,
) -> Result<(CMatrix, f64)> {
    if channel.ncols() != pilots.num_antennas() {
        return Err(Error::dims("downlink_observe (H columns vs pilot rows)", pilots.num_antennas(), channel.ncols()));
    }
    add_noise(channel * pilots.phi(), snr, rng)
}

/// Uplink transmission of the raw observation.
#[derive(Debug, Clone, PartialEq)]
pub struct Feedback {
    /// `M x T` received at the BS.
    pub received: CMatrix,
    /// `M x K` uplink channel, known to the BS.
    pub uplink: CMatrix,
    pub sigma_w: f64,
}

/// Draws a CN(0, 1) Rayleigh uplink channel and forms `Z = Q Y + W`.
pub fn uplink_feedback<R: Rng + ?Sized>(
    observation: &CMatrix,
    num_antennas: usize,
    snr: Snr,
    rng: &mut R,
) -> Result<Feedback> {
    let users = observation.nrows();
    if num_antennas < users {
        return Err(Error::FeedbackRankDeficiency {
            antennas: num_antennas,
            users,
        });
    }
    let uplink = complex_normal_matrix(rng, num_antennas, users, 1.0);
    let (received, sigma_w) = uplink_through(observation, &uplink, snr, rng)?;
    Ok(Feedback {
        received,
        uplink,
        sigma_w,
    })
}

/// `Z = Q Y + W` for a caller-supplied uplink channel.
pub fn uplink_through<R: Rng + ?Sized>(
    observation: &CMatrix,
    uplink: &CMatrix,
    snr: Snr,
    rng: &mut R,
) -> Result<(CMatrix, f64)> {
    if uplink.ncols() != observation.nrows() {
        return Err(Error::dims("uplink_through (Q columns vs users)", observation.nrows(), uplink.ncols()));
    }
    if uplink.nrows() < uplink.ncols() {
        return Err(Error::FeedbackRankDeficiency {
            antennas: uplink.nrows(),
            users: uplink.ncols(),
        });
    }
    add_noise(uplink * observation, snr, rng)
}

/// Least-squares estimate `(Q^H Q)^-1 Q^H Z` of the fed-back observation.
pub fn recover_observation(received: &CMatrix, uplink: &CMatrix) -> Result<CMatrix> {
    let (m, k) = uplink.shape();
    if received.nrows() != m {
        return Err(Error::dims("recover_observation (Z rows vs Q rows)", m, received.nrows()));
    }
    if m < k {
        return Err(Error::FeedbackRankDeficiency { antennas: m, users: k });
    }
    // Q = U S V^H with full column rank gives (Q^H Q)^-1 Q^H = V S^-1 U^H
    let dec = linalg::svd(uplink, true)?;
    let sv = &dec.singular_values;
    let s1 = sv.iter().copied().fold(0.0, f64::max);
    let smallest = sv.iter().copied().fold(f64::INFINITY, f64::min);
    let tolerance = linalg::rank_tolerance(m, k, s1);
    if k == 0 || smallest.is_nan() || smallest <= tolerance {
        return Err(Error::RankDeficientUplink { smallest, tolerance });
    }
    let u = dec.u.as_ref().expect("u requested");
    let v_t = dec.v_t.as_ref().expect("v_t requested");
    let mut projected = u.adjoint() * received;
    for (r, mut row) in projected.row_iter_mut().enumerate() {
        row /= Complex64::from(sv[r]);
    }
    Ok(v_t.adjoint() * projected)
}

/// Everything produced by one pass of the training and feedback chain.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservationSet {
    pub y: CMatrix,
    pub sigma_n: f64,
    pub uplink: CMatrix,
    pub z: CMatrix,
    pub sigma_w: f64,
    pub y_hat: CMatrix,
}

/// Runs downlink observation, uplink feedback and BS-side recovery with separate rngs.
pub fn observe_and_feed_back<R1, R2, R3>(
    channel: &CMatrix,
    pilots: &PilotMatrix,
    downlink_snr: Snr,
    uplink_snr: Snr,
    downlink_noise: &mut R1,
    uplink_channel: &mut R2,
    uplink_noise: &mut R3,
) -> Result<ObservationSet>
where
    R1: Rng + ?Sized,
    R2: Rng + ?Sized,
    R3: Rng + ?Sized,
{
    let (y, sigma_n) = downlink_observe(channel, pilots, downlink_snr, downlink_noise)?;
    let m = pilots.num_antennas();
    if m < y.nrows() {
        return Err(Error::FeedbackRankDeficiency {
            antennas: m,
            users: y.nrows(),
        });
    }
    let uplink = complex_normal_matrix(uplink_channel, m, y.nrows(), 1.0);
    let (z, sigma_w) = uplink_through(&y, &uplink, uplink_snr, uplink_noise)?;
    let y_hat = recover_observation(&z, &uplink)?;
    Ok(ObservationSet {
        y,
        sigma_n,
        uplink,
        z,
        sigma_w,
        y_hat,
    })
}

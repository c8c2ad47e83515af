//! Quantum-channel scalars: source photon number, electro-optic transduction
//! efficiency, squeezed-thermal homodyne variance, SNR and loss bookkeeping.
//!
//! Frequencies are taken in Hz and converted to rad/s (`ω = 2πf`) where a
//! formula needs an angular frequency.

use std::f64::consts::{LN_10, PI};

use crate::error::{Error, Result};

/// Reduced Planck constant (CODATA 2018), J·s.
pub const HBAR: f64 = 1.054_571_817e-34;

/// Power ratio to decibels.
pub fn to_db(linear: f64) -> f64 {
    10.0 * linear.log10()
}

pub fn from_db(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SourceParams {
    /// Radiated power, W.
    pub p_s: f64,
    /// Carrier frequency, Hz.
    pub carrier_hz: f64,
    /// Bandwidth, Hz.
    pub bandwidth_hz: f64,
    /// Pulse duration, s.
    pub duration: f64,
}

impl SourceParams {
    /// Number of time modes `M = B·T`.
    pub fn time_modes(&self) -> f64 {
        self.bandwidth_hz * self.duration
    }

    fn validate(&self) -> Result<()> {
        let ok = self.p_s >= 0.0
            && self.carrier_hz > 0.0
            && self.bandwidth_hz > 0.0
            && self.duration > 0.0
            && self.time_modes() >= 1.0;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!("invalid source {self:?}")))
        }
    }
}

/// Whole-image source photons per time mode, `n_S = P_S / (ħ ω B)`.
pub fn source_photons(src: &SourceParams) -> Result<f64> {
    src.validate()?;
    let omega = 2.0 * PI * src.carrier_hz;
    Ok(src.p_s / (HBAR * omega * src.bandwidth_hz))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransducerSpec {
    pub v_pi: f64,
    pub p_in: f64,
    pub impedance: f64,
    /// RF frequency, Hz.
    pub rf_hz: f64,
    /// Optical frequency, Hz.
    pub optical_hz: f64,
}

/// Electro-optic beamsplitter transmissivity
/// `η = (π² / 4V_π²)·(ω_e/ω_o)·Z·P_in`. Fails if `η ≥ 1`.
pub fn transduction_efficiency(t: &TransducerSpec) -> Result<f64> {
    let fields = [t.v_pi, t.p_in, t.impedance, t.rf_hz, t.optical_hz];
    if fields.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
        return Err(Error::InvalidArgument(format!("invalid transducer {t:?}")));
    }
    let eta = PI * PI / (4.0 * t.v_pi * t.v_pi) * (t.rf_hz / t.optical_hz) * t.impedance * t.p_in;
    if eta >= 1.0 {
        return Err(Error::BeyondBeamsplitter(eta));
    }
    Ok(eta)
}

/// Scalars of the object + transduction + squeezed-probe channel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelParams {
    /// Transduction power transmissivity, (0, 1].
    pub eta: f64,
    /// Linear squeezing gain, ≥ 1.
    pub gain: f64,
    /// Thermal photons at the object, N_B.
    pub n_b: f64,
    /// Source photons per mode.
    pub n_s: f64,
    /// Mean object transmissivity κ̄.
    pub kappa_bar: f64,
}

impl ChannelParams {
    pub fn new(eta: f64, gain: f64, n_b: f64, n_s: f64, kappa_bar: f64) -> Result<Self> {
        let p = Self {
            eta,
            gain,
            n_b,
            n_s,
            kappa_bar,
        };
        p.validate()?;
        Ok(p)
    }

    /// Builds parameters from the detector-side quantities `n_P′` and `N_B′`,
    /// back-solving `n_S = n_P′/(ηκ̄)` and `N_B = N_B′/η`.
    pub fn from_detected(
        eta: f64,
        gain: f64,
        n_b_prime: f64,
        n_p_prime: f64,
        kappa_bar: f64,
    ) -> Result<Self> {
        if !(eta > 0.0 && kappa_bar > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "need η > 0 and κ̄ > 0 (got {eta}, {kappa_bar})"
            )));
        }
        Self::new(
            eta,
            gain,
            n_b_prime / eta,
            n_p_prime / (eta * kappa_bar),
            kappa_bar,
        )
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.eta, self.gain, self.n_b, self.n_s, self.kappa_bar]
            .iter()
            .all(|v| v.is_finite());
        if !finite
            || !(self.eta > 0.0 && self.eta <= 1.0)
            || self.gain < 1.0
            || self.n_b < 0.0
            || self.n_s < 0.0
            || !(0.0..=1.0).contains(&self.kappa_bar)
        {
            return Err(Error::InvalidArgument(format!(
                "invalid channel parameters {self:?}"
            )));
        }
        Ok(())
    }

    /// Detected information photons `n_P′ = η κ̄ n_S`.
    pub fn n_p_prime(&self) -> f64 {
        self.eta * self.kappa_bar * self.n_s
    }

    /// Detected thermal photons `N_B′ = η N_B`.
    pub fn n_b_prime(&self) -> f64 {
        self.eta * self.n_b
    }

    pub fn gain_db(&self) -> f64 {
        to_db(self.gain)
    }
}

/// Homodyne quadrature variance `[(1−η)/G + 2ηN_B] / 4`.
pub fn readout_variance(p: &ChannelParams) -> f64 {
    ((1.0 - p.eta) / p.gain + 2.0 * p.n_b_prime()) / 4.0
}

/// Whole-image SNR per time mode, `4ηκ̄n_S / [(1−η)/G + 2ηN_B]`.
pub fn snr(p: &ChannelParams) -> Result<f64> {
    let denom = (1.0 - p.eta) / p.gain + 2.0 * p.n_b_prime();
    if denom <= 0.0 {
        return Err(Error::NoiselessDivergence);
    }
    Ok(4.0 * p.n_p_prime() / denom)
}

/// Quantum-limited gain giving the same readout variance as gain `g_d` with
/// thermal background `N_B′`: `(1/G_d + 2N_B′)⁻¹`.
pub fn equivalent_quantum_limited_gain(g_d: f64, n_b_prime: f64) -> Result<f64> {
    if !(g_d > 0.0) || n_b_prime < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "need G_d > 0 and N_B′ ≥ 0 (got {g_d}, {n_b_prime})"
        )));
    }
    Ok(1.0 / (1.0 / g_d + 2.0 * n_b_prime))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossModel {
    /// Material loss coefficient, 1/m.
    pub alpha: f64,
    /// Penetration depth, m.
    pub z_pen: f64,
}

/// `−10 log₁₀ e^{−αz}`.
pub fn penetration_loss_db(l: &LossModel) -> Result<f64> {
    if l.alpha < 0.0 || l.z_pen < 0.0 {
        return Err(Error::InvalidArgument(format!("invalid loss model {l:?}")));
    }
    Ok(10.0 * l.alpha * l.z_pen / LN_10)
}

/// Power transmissivity for a loss in dB, `10^{−loss/10}`.
pub fn kappa_from_loss_db(loss_db: f64) -> Result<f64> {
    if !(loss_db >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "loss must be ≥ 0 dB, got {loss_db}"
        )));
    }
    Ok(10f64.powf(-loss_db / 10.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn params(eta: f64, gain: f64, n_b_prime: f64, n_p_prime: f64) -> ChannelParams {
        ChannelParams::from_detected(eta, gain, n_b_prime, n_p_prime, 1e-10).unwrap()
    }

    #[test]
    fn source_photons_application_point() {
        let src = SourceParams {
            p_s: 3e-3,
            carrier_hz: 100e3,
            bandwidth_hz: 50e3,
            duration: 1.0 / 50e3,
        };
        let n_s = source_photons(&src).unwrap();
        // 3e-3 / (ħ · 2π·1e5 · 5e4) ≈ 9.06e20
        assert_relative_eq!(n_s, 3e-3 / (HBAR * 2.0 * PI * 1e5 * 5e4), max_relative = 1e-12);
        assert!((n_s.log10() - 21.0).abs() < 1.0);

        let doubled = SourceParams {
            bandwidth_hz: 100e3,
            ..src
        };
        assert_relative_eq!(source_photons(&doubled).unwrap(), n_s / 2.0, max_relative = 1e-12);
        let dark = SourceParams { p_s: 0.0, ..src };
        assert_eq!(source_photons(&dark).unwrap(), 0.0);
    }

    #[test]
    fn transduction_commercial_point() {
        let t = TransducerSpec {
            v_pi: 1.0,
            p_in: 0.1,
            impedance: 50.0,
            rf_hz: 100e3,
            optical_hz: 192e12,
        };
        let eta = transduction_efficiency(&t).unwrap();
        let hand = PI * PI / 4.0 * (1e5 / 1.92e14) * 50.0 * 0.1;
        assert_relative_eq!(eta, hand, max_relative = 1e-12);
        assert!((eta - 6.4e-9).abs() < 0.05e-9);
        assert!((eta.log10() + 9.0).abs() < 1.0);

        let quad = TransducerSpec { v_pi: 4.0, ..t };
        assert_relative_eq!(transduction_efficiency(&quad).unwrap(), eta / 16.0, max_relative = 1e-12);

        let hot = TransducerSpec { p_in: 1e9, ..t };
        assert!(matches!(
            transduction_efficiency(&hot),
            Err(Error::BeyondBeamsplitter(_))
        ));
    }

    #[test]
    fn readout_variance_anchors() {
        let lossless = ChannelParams::new(1.0, 7.0, 0.0, 1.0, 1.0).unwrap();
        assert_eq!(readout_variance(&lossless), 0.0);
        let vacuum = params(1e-300, 1.0, 0.0, 0.0);
        assert_eq!(readout_variance(&vacuum), 0.25);
        let thermal = params(1e-9, 10.0, 0.1, 100.0);
        assert_relative_eq!(readout_variance(&thermal), 0.075, max_relative = 1e-8);
    }

    #[test]
    fn snr_examples() {
        let p = params(1e-9, 1.0, 0.0, 100.0);
        assert_relative_eq!(snr(&p).unwrap(), 400.0 / (1.0 - 1e-9), max_relative = 1e-10);

        let ceiling = params(1e-9, f64::INFINITY.min(1e300), 0.1, 100.0);
        assert_relative_eq!(snr(&ceiling).unwrap(), 2000.0, max_relative = 1e-8);

        // onset of saturation: the two noise terms are equal at G = 1/(2N_B′)
        let onset = 1.0 / (2.0 * 0.1);
        assert_relative_eq!(onset, 5.0);
        let p = params(1e-9, onset, 0.1, 100.0);
        assert_relative_eq!(snr(&p).unwrap(), 1000.0, max_relative = 1e-8);

        let silent = ChannelParams::new(1.0, 1.0, 0.0, 1.0, 1.0).unwrap();
        assert!(matches!(snr(&silent), Err(Error::NoiselessDivergence)));
    }

    #[test]
    fn equivalent_gain_examples() {
        assert_relative_eq!(equivalent_quantum_limited_gain(1e300, 0.1).unwrap(), 5.0);
        assert_eq!(equivalent_quantum_limited_gain(1.0, 0.0).unwrap(), 1.0);
        assert_relative_eq!(
            equivalent_quantum_limited_gain(2.5, 0.1).unwrap(),
            1.0 / 0.6,
            max_relative = 1e-12
        );
        assert!(equivalent_quantum_limited_gain(0.0, 0.1).is_err());
    }

    #[test]
    fn loss_conversions() {
        let l = LossModel {
            alpha: 1e10f64.ln(),
            z_pen: 1.0,
        };
        assert_relative_eq!(penetration_loss_db(&l).unwrap(), 100.0, max_relative = 1e-12);
        let zero = LossModel { alpha: 0.0, z_pen: 5.0 };
        assert_eq!(penetration_loss_db(&zero).unwrap(), 0.0);
        let ten = LossModel {
            alpha: LN_10,
            z_pen: 1.0,
        };
        assert_relative_eq!(penetration_loss_db(&ten).unwrap(), 10.0, max_relative = 1e-12);

        assert_relative_eq!(kappa_from_loss_db(100.0).unwrap(), 1e-10, max_relative = 1e-12);
        assert_eq!(kappa_from_loss_db(0.0).unwrap(), 1.0);
        assert!((kappa_from_loss_db(3.0).unwrap() - 0.501).abs() < 1e-3);
        assert!(kappa_from_loss_db(-1.0).is_err());
    }

    #[test]
    fn saturation_within_two_percent() {
        let n_b_prime = 0.1;
        let at = params(1e-9, 50.0 / n_b_prime, n_b_prime, 100.0);
        let inf = params(1e-9, 1e300, n_b_prime, 100.0);
        let (a, b) = (snr(&at).unwrap(), snr(&inf).unwrap());
        assert!((b - a) / b < 0.02);
    }

    proptest! {
        #[test]
        fn snr_increasing_in_gain_without_thermal(g in 1.0f64..1e6, k in 1.001f64..10.0) {
            let lo = params(1e-9, g, 0.0, 100.0);
            let hi = params(1e-9, g * k, 0.0, 100.0);
            prop_assert!(snr(&hi).unwrap() > snr(&lo).unwrap());
        }

        #[test]
        fn snr_increasing_in_source(n in 1.0f64..1e6, k in 1.001f64..10.0, nb in 0.0f64..1.0) {
            let lo = params(1e-9, 3.0, nb, n);
            let hi = params(1e-9, 3.0, nb, n * k);
            prop_assert!(snr(&hi).unwrap() > snr(&lo).unwrap());
        }

        #[test]
        fn loss_roundtrip(loss in 0.0f64..300.0) {
            let kappa = kappa_from_loss_db(loss).unwrap();
            let back = penetration_loss_db(&LossModel { alpha: -kappa.ln(), z_pen: 1.0 }).unwrap();
            prop_assert!((back - loss).abs() <= 1e-12 * loss.max(1.0));
        }

        #[test]
        fn equivalent_gain_matches_variance(g_d in 1.0f64..1e4, nb in 0.0f64..2.0) {
            let g_c = equivalent_quantum_limited_gain(g_d, nb).unwrap();
            let eta = 1e-300;
            let quantum = ChannelParams::new(eta, g_c.max(1.0), 0.0, 0.0, 1.0).unwrap();
            let thermal = ChannelParams::new(eta, g_d, nb / eta, 0.0, 1.0).unwrap();
            if g_c >= 1.0 {
                let (a, b) = (readout_variance(&quantum), readout_variance(&thermal));
                prop_assert!((a - b).abs() <= 1e-12 * b);
            }
        }
    }
}

//! Link-level channel model.
//!
//! The downlink consists of a direct base-station-to-user path plus one
//! cascaded path per surface element. Every path is Rician: a deterministic
//! line-of-sight term mixed with a circularly symmetric Gaussian scattered
//! term, weighted by the Rician factor `kappa`. Element paths pick up the
//! element's forwarding gain, which depends on the arrival and departure
//! angles through cosine-cubed power patterns; the departure side uses the
//! reflective branch in front of the panel and the transmissive branch
//! (scaled by `epsilon`) behind it.
//!
//! Phases are canonicalized into `[0, 2π)` by one shared helper before any
//! `from_polar`, so independently assembled line-of-sight terms compare
//! bitwise equal across modules.

use num_complex::Complex;
use rand::Rng;

use crate::error::{Error, Result};
use crate::geometry::{directions, Direction, PanelGeometry, Point3};
use crate::num::{complex_normal, wrap_angle, Real};

// ── RF constants ────────────────────────────────────────────────────────────

/// Scenario-level radio constants. Powers are linear watts; gains are linear
/// power ratios.
#[derive(Debug, Clone, PartialEq)]
pub struct RfConstants<F> {
    /// Carrier wavelength, metres.
    pub wavelength: F,
    /// Rician factor `kappa >= 0`; `infinity` selects the pure LoS limit.
    pub rician_kappa: F,
    /// Transmit antenna gain.
    pub tx_gain: F,
    /// Receive antenna gain.
    pub rx_gain: F,
    /// Per-element forwarding gain.
    pub element_gain: F,
    /// Transmit-side normalized pattern value toward the panel, in (0, 1].
    pub tx_pattern_gain: F,
    /// Receive-side normalized pattern value, in (0, 1].
    pub rx_pattern_gain: F,
    /// Direct-path power decay exponent.
    pub alpha: F,
    /// Transmit power, watts.
    pub tx_power: F,
    /// Noise power, watts.
    pub noise_power: F,
    /// Transmissive power fraction, in [0, 1]; 0 disables the transmissive
    /// branch (pure reflector).
    pub epsilon: F,
    /// Element amplitude response magnitude squared, in (0, 1].
    pub gamma_sq: F,
    /// Scattered-path power decay exponent.
    pub nlos_exponent: F,
    /// Scattered-path reference power gain at 1 m.
    pub nlos_ref_gain: F,
    /// What-if switch that removes the direct path entirely.
    pub direct_blocked: bool,
}

impl<F: Real> Default for RfConstants<F> {
    /// Reference downlink: 5 GHz carrier, 40 dBm transmit power, -96 dBm
    /// noise floor, unit antenna and element gains, Rician factor 4, and a
    /// severely faded direct path (decay exponent 5.5, scattered reference
    /// gain -40 dB) as seen over a long indoor link.
    fn default() -> Self {
        Self {
            wavelength: F::of(0.06),
            rician_kappa: F::of(4.0),
            tx_gain: F::one(),
            rx_gain: F::one(),
            element_gain: F::one(),
            tx_pattern_gain: F::one(),
            rx_pattern_gain: F::one(),
            alpha: F::of(5.5),
            tx_power: F::of(10.0),
            noise_power: F::of(10.0).powf(F::of(-12.6)),
            epsilon: F::one(),
            gamma_sq: F::one(),
            nlos_exponent: F::of(3.5),
            nlos_ref_gain: F::of(1.0e-4),
            direct_blocked: false,
        }
    }
}

impl<F: Real> RfConstants<F> {
    /// Checks every field against its admissible range.
    pub fn validate(&self) -> Result<()> {
        let pos = |v: F, name: &str| -> Result<()> {
            if v.is_finite() && v > F::zero() {
                Ok(())
            } else {
                Err(Error::Config(format!("{name} must be positive, got {v}")))
            }
        };
        pos(self.wavelength, "rf.wavelength")?;
        pos(self.tx_gain, "rf.tx_gain")?;
        pos(self.rx_gain, "rf.rx_gain")?;
        pos(self.element_gain, "rf.element_gain")?;
        pos(self.tx_power, "rf.tx_power")?;
        pos(self.noise_power, "rf.noise_power")?;
        pos(self.nlos_ref_gain, "rf.nlos_ref_gain")?;
        if !(self.rician_kappa >= F::zero()) {
            return Err(Error::Config(format!(
                "rf.rician_kappa must be >= 0, got {}",
                self.rician_kappa
            )));
        }
        for (v, name) in [
            (self.tx_pattern_gain, "rf.tx_pattern_gain"),
            (self.rx_pattern_gain, "rf.rx_pattern_gain"),
            (self.gamma_sq, "rf.gamma_sq"),
        ] {
            if !(v > F::zero() && v <= F::one()) {
                return Err(Error::Config(format!(
                    "{name} must be in (0, 1], got {v}"
                )));
            }
        }
        if !(self.epsilon >= F::zero() && self.epsilon <= F::one()) {
            return Err(Error::Config(format!(
                "rf.epsilon must be in [0, 1], got {}",
                self.epsilon
            )));
        }
        if !(self.alpha.is_finite() && self.alpha >= F::zero()) {
            return Err(Error::Config(format!(
                "rf.alpha must be >= 0, got {}",
                self.alpha
            )));
        }
        if !(self.nlos_exponent.is_finite() && self.nlos_exponent >= F::zero()) {
            return Err(Error::Config(format!(
                "rf.nlos_exponent must be >= 0, got {}",
                self.nlos_exponent
            )));
        }
        Ok(())
    }

    /// Copy with the transmissive branch disabled; this is the pure-reflector
    /// baseline configuration.
    pub fn reflector_baseline(&self) -> Self {
        let mut rf = self.clone();
        rf.epsilon = F::zero();
        rf
    }
}

/// LoS and scattered mixing weights `(sqrt(k/(1+k)), sqrt(1/(1+k)))`.
///
/// `kappa = 0` yields pure scattering, `kappa = infinity` pure LoS.
pub fn rician_weights<F: Real>(kappa: F) -> (F, F) {
    if kappa.is_infinite() {
        (F::one(), F::zero())
    } else {
        let denom = F::one() + kappa;
        ((kappa / denom).sqrt(), denom.recip().sqrt())
    }
}

// ── Phase-shift vectors ─────────────────────────────────────────────────────

/// Discrete phase configuration of a panel: one state index per element out
/// of `s_a` uniformly spaced states, realized as `psi_m = index_m * 2π/s_a`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PhaseShiftVector {
    indices: Vec<u32>,
    s_a: u32,
}

impl PhaseShiftVector {
    /// Builds a configuration, checking every index against `s_a`.
    pub fn new(indices: Vec<u32>, s_a: u32) -> Result<Self> {
        if s_a < 1 {
            return Err(Error::Config("s_a must be at least 1".into()));
        }
        if let Some(bad) = indices.iter().find(|&&l| l >= s_a) {
            return Err(Error::Config(format!(
                "phase index {bad} out of range for s_a = {s_a}"
            )));
        }
        Ok(Self { indices, s_a })
    }

    pub fn indices(&self) -> &[u32] {
        &self.indices
    }

    pub fn s_a(&self) -> u32 {
        self.s_a
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    /// Grid spacing `2π/s_a`.
    pub fn step<F: Real>(&self) -> F {
        F::TAU() / F::of(f64::from(self.s_a))
    }

    /// Realized phases in radians, `indices[m] * 2π/s_a`.
    pub fn realized<F: Real>(&self) -> Vec<F> {
        let step = self.step::<F>();
        self.indices
            .iter()
            .map(|&l| F::of(f64::from(l)) * step)
            .collect()
    }
}

// ── Power patterns and element gain ─────────────────────────────────────────

/// Arrival power pattern `|cos^3 theta|`.
pub fn pattern_arrival<F: Real>(arrival: &Direction<F>) -> F {
    arrival.theta.cos().abs().powi(3)
}

/// Departure power pattern: `cos^3 theta` in front of the panel,
/// `epsilon * |cos theta|^3` behind it, and zero exactly broadside where
/// neither branch applies. The branch is taken on the angle itself so that
/// `theta = pi/2` maps to zero despite `cos(pi/2)` rounding away from it.
pub fn pattern_departure<F: Real>(departure: &Direction<F>, epsilon: F) -> F {
    let half = F::FRAC_PI_2();
    if departure.theta < half {
        departure.theta.cos().powi(3)
    } else if departure.theta > half {
        epsilon * departure.theta.cos().abs().powi(3)
    } else {
        F::zero()
    }
}

/// Complex forwarding gain of one element:
/// `sqrt(G_m * K_arr * K_dep * dx * dy * gamma_sq) * exp(-j psi)`.
pub fn element_power_gain<F: Real>(
    panel: &PanelGeometry<F>,
    arrival: &Direction<F>,
    departure: &Direction<F>,
    psi: F,
    rf: &RfConstants<F>,
) -> Complex<F> {
    let k_arr = pattern_arrival(arrival);
    let k_dep = pattern_departure(departure, rf.epsilon);
    let mag =
        (rf.element_gain * k_arr * k_dep * panel.delta_x * panel.delta_y * rf.gamma_sq).sqrt();
    Complex::from_polar(mag, wrap_angle(-psi))
}

// ── Path building blocks ────────────────────────────────────────────────────

/// Scattered-path amplitude `sqrt(C) * d^(-beta/2)` at distance `d`.
pub fn nlos_pathloss<F: Real>(d: F, rf: &RfConstants<F>) -> F {
    assert!(d > F::zero(), "path distance must be positive");
    rf.nlos_ref_gain.sqrt() * d.powf(-rf.nlos_exponent * F::of(0.5))
}

/// Direct LoS term as `(amplitude, phase)` with the phase wrapped to
/// `[0, 2π)`. Returns zeros when the direct path is blocked.
pub fn direct_los_parts<F: Real>(bs: Point3<F>, mu: Point3<F>, rf: &RfConstants<F>) -> (F, F) {
    if rf.direct_blocked {
        return (F::zero(), F::zero());
    }
    let d = bs.dist(mu);
    assert!(d > F::zero(), "base station and user coincide");
    let amp = (rf.tx_gain * rf.rx_gain).sqrt() * d.powf(-rf.alpha * F::of(0.5));
    let base = wrap_angle(-F::TAU() * d / rf.wavelength);
    (amp, base)
}

/// Deterministic LoS part of the direct channel.
pub fn direct_los<F: Real>(bs: Point3<F>, mu: Point3<F>, rf: &RfConstants<F>) -> Complex<F> {
    let (amp, base) = direct_los_parts(bs, mu, rf);
    Complex::from_polar(amp, base)
}

/// Cascaded LoS term of element `m` as `(amplitude, phase)` for phase shift
/// zero; applying a shift `psi` rotates the term by `-psi`. The phase is
/// wrapped to `[0, 2π)`. Errors if an endpoint coincides with the element.
pub fn element_los_parts<F: Real>(
    panel: &PanelGeometry<F>,
    m: usize,
    bs: Point3<F>,
    mu: Point3<F>,
    rf: &RfConstants<F>,
) -> Result<(F, F)> {
    let (arrival, departure) = directions(panel, m, bs, mu)?;
    let pos = panel.element_position(m);
    let d1 = bs.dist(pos);
    let d2 = pos.dist(mu);
    let g = element_power_gain(panel, &arrival, &departure, F::zero(), rf);
    let four_pi = F::of(4.0) * F::PI();
    let amp = rf.wavelength
        * (rf.tx_gain * rf.tx_pattern_gain * rf.rx_gain * rf.rx_pattern_gain).sqrt()
        * g.re
        / (four_pi.powf(F::of(1.5)) * d1 * d2);
    let base = wrap_angle(-F::TAU() * (d1 + d2) / rf.wavelength);
    Ok((amp, base))
}

/// Deterministic LoS part of element `m`'s cascaded channel under phase
/// shift `psi`.
pub fn element_channel_los<F: Real>(
    panel: &PanelGeometry<F>,
    m: usize,
    bs: Point3<F>,
    mu: Point3<F>,
    psi: F,
    rf: &RfConstants<F>,
) -> Result<Complex<F>> {
    let (amp, base) = element_los_parts(panel, m, bs, mu, rf)?;
    Ok(Complex::from_polar(amp, base - psi))
}

// ── Small-scale fading draws ────────────────────────────────────────────────

/// One set of scattered-path draws: a unit complex Gaussian per element plus
/// one for the direct path. Sharing a set across system variants gives
/// common-random-number comparisons.
#[derive(Debug, Clone)]
pub struct SmallScaleDraws<F> {
    pub elements: Vec<Complex<F>>,
    pub direct: Complex<F>,
}

impl<F: Real> SmallScaleDraws<F> {
    /// Draws for `m_elements` elements, element terms first, direct last.
    pub fn draw<R: Rng + ?Sized>(m_elements: usize, rng: &mut R) -> Self {
        let elements = (0..m_elements).map(|_| complex_normal(rng)).collect();
        let direct = complex_normal(rng);
        Self { elements, direct }
    }
}

// ── Sampled channels ────────────────────────────────────────────────────────

/// Sampled direct channel from a given scattered draw.
pub fn direct_channel_with_draw<F: Real>(
    bs: Point3<F>,
    mu: Point3<F>,
    rf: &RfConstants<F>,
    w: Complex<F>,
) -> Complex<F> {
    if rf.direct_blocked {
        return Complex::new(F::zero(), F::zero());
    }
    let (a, b) = rician_weights(rf.rician_kappa);
    let los = direct_los(bs, mu, rf);
    let nlos = w * nlos_pathloss(bs.dist(mu), rf);
    los * a + nlos * b
}

/// Sampled direct channel; draws the scattered term from `rng`.
pub fn direct_channel<F: Real, R: Rng + ?Sized>(
    bs: Point3<F>,
    mu: Point3<F>,
    rf: &RfConstants<F>,
    rng: &mut R,
) -> Complex<F> {
    direct_channel_with_draw(bs, mu, rf, complex_normal(rng))
}

/// Sampled cascaded channel of element `m` from a given scattered draw.
pub fn element_channel_with_draw<F: Real>(
    panel: &PanelGeometry<F>,
    m: usize,
    bs: Point3<F>,
    mu: Point3<F>,
    psi: F,
    rf: &RfConstants<F>,
    w: Complex<F>,
) -> Result<Complex<F>> {
    let (a, b) = rician_weights(rf.rician_kappa);
    let los = element_channel_los(panel, m, bs, mu, psi, rf)?;
    let pos = panel.element_position(m);
    let nlos = w * (nlos_pathloss(bs.dist(pos), rf) * nlos_pathloss(pos.dist(mu), rf));
    Ok(los * a + nlos * b)
}

/// Sampled cascaded channel of element `m`; draws the scattered term from
/// `rng`.
pub fn element_channel<F: Real, R: Rng + ?Sized>(
    panel: &PanelGeometry<F>,
    m: usize,
    bs: Point3<F>,
    mu: Point3<F>,
    psi: F,
    rf: &RfConstants<F>,
    rng: &mut R,
) -> Result<Complex<F>> {
    element_channel_with_draw(panel, m, bs, mu, psi, rf, complex_normal(rng))
}

// ── Composite channel ───────────────────────────────────────────────────────

/// One sampled end-to-end channel with its term-by-term decomposition.
///
/// For every term, `*_los + *_nlos` reproduces the term exactly (the parts
/// are stored post-mixing), and summing `h_element` in index order then
/// adding `h_direct` reproduces `h_total` exactly.
#[derive(Debug, Clone)]
pub struct ChannelRealization<F> {
    pub h_direct: Complex<F>,
    pub h_direct_los: Complex<F>,
    pub h_direct_nlos: Complex<F>,
    pub h_element: Vec<Complex<F>>,
    pub h_element_los: Vec<Complex<F>>,
    pub h_element_nlos: Vec<Complex<F>>,
    pub h_total: Complex<F>,
}

impl<F: Real> ChannelRealization<F> {
    /// Unweighted LoS composite `sum of element LoS terms + direct LoS`,
    /// before Rician mixing.
    pub fn los_composite(&self, kappa: F) -> Complex<F> {
        let (a, _) = rician_weights(kappa);
        if a == F::zero() {
            return Complex::new(F::zero(), F::zero());
        }
        let mut sum = Complex::new(F::zero(), F::zero());
        for h in &self.h_element_los {
            sum += *h;
        }
        (sum + self.h_direct_los) / a
    }
}

/// Assembles the sampled composite channel from a fixed draw set.
///
/// `psis` holds one realized phase per element. Element terms are summed in
/// index order and the direct term added last.
pub fn composite_channel_with_draws<F: Real>(
    panel: &PanelGeometry<F>,
    bs: Point3<F>,
    mu: Point3<F>,
    psis: &[F],
    rf: &RfConstants<F>,
    draws: &SmallScaleDraws<F>,
) -> Result<ChannelRealization<F>> {
    let m_count = panel.num_elements();
    assert_eq!(psis.len(), m_count, "one phase per element required");
    assert_eq!(draws.elements.len(), m_count, "one draw per element required");
    let (a, b) = rician_weights(rf.rician_kappa);

    let mut h_element = Vec::with_capacity(m_count);
    let mut h_element_los = Vec::with_capacity(m_count);
    let mut h_element_nlos = Vec::with_capacity(m_count);
    let mut sum = Complex::new(F::zero(), F::zero());
    for m in 1..=m_count {
        let los = element_channel_los(panel, m, bs, mu, psis[m - 1], rf)? * a;
        let pos = panel.element_position(m);
        let nlos = draws.elements[m - 1]
            * (nlos_pathloss(bs.dist(pos), rf) * nlos_pathloss(pos.dist(mu), rf))
            * b;
        let h = los + nlos;
        sum += h;
        h_element.push(h);
        h_element_los.push(los);
        h_element_nlos.push(nlos);
    }

    let (h_direct, h_direct_los, h_direct_nlos) = if rf.direct_blocked {
        let zero = Complex::new(F::zero(), F::zero());
        (zero, zero, zero)
    } else {
        let los = direct_los(bs, mu, rf) * a;
        let nlos = draws.direct * nlos_pathloss(bs.dist(mu), rf) * b;
        (los + nlos, los, nlos)
    };

    Ok(ChannelRealization {
        h_direct,
        h_direct_los,
        h_direct_nlos,
        h_element,
        h_element_los,
        h_element_nlos,
        h_total: sum + h_direct,
    })
}

/// Assembles one sampled composite channel, drawing fresh scattered terms.
pub fn composite_channel<F: Real, R: Rng + ?Sized>(
    panel: &PanelGeometry<F>,
    bs: Point3<F>,
    mu: Point3<F>,
    psis: &[F],
    rf: &RfConstants<F>,
    rng: &mut R,
) -> Result<ChannelRealization<F>> {
    let draws = SmallScaleDraws::draw(panel.num_elements(), rng);
    composite_channel_with_draws(panel, bs, mu, psis, rf, &draws)
}

// ── Rate mapping and moments ────────────────────────────────────────────────

/// Spectral efficiency `log2(1 + P * power / sigma^2)` for a given channel
/// power `|h|^2`.
pub fn se_from_power<F: Real>(power: F, rf: &RfConstants<F>) -> F {
    (F::one() + rf.tx_power * power / rf.noise_power).log2()
}

/// Spectral efficiency of a channel realization value.
pub fn spectral_efficiency<F: Real>(h: Complex<F>, rf: &RfConstants<F>) -> F {
    se_from_power(h.norm_sqr(), rf)
}

/// Exact second moment `E[|h|^2]` of the composite channel under the fading
/// model: the LoS composite contributes coherently with weight `k/(1+k)`,
/// and every scattered term adds its mean power with weight `1/(1+k)`.
pub fn expected_channel_power<F: Real>(
    panel: &PanelGeometry<F>,
    bs: Point3<F>,
    mu: Point3<F>,
    psis: &[F],
    rf: &RfConstants<F>,
) -> Result<F> {
    let m_count = panel.num_elements();
    assert_eq!(psis.len(), m_count, "one phase per element required");
    let mut los_sum = Complex::new(F::zero(), F::zero());
    let mut nlos_pow = F::zero();
    for m in 1..=m_count {
        los_sum += element_channel_los(panel, m, bs, mu, psis[m - 1], rf)?;
        let pos = panel.element_position(m);
        let pl = nlos_pathloss(bs.dist(pos), rf) * nlos_pathloss(pos.dist(mu), rf);
        nlos_pow += pl * pl;
    }
    if !rf.direct_blocked {
        let (amp, base) = direct_los_parts(bs, mu, rf);
        los_sum += Complex::from_polar(amp, base);
        let pl = nlos_pathloss(bs.dist(mu), rf);
        nlos_pow += pl * pl;
    }
    let kappa = rf.rician_kappa;
    if kappa.is_infinite() {
        return Ok(los_sum.norm_sqr());
    }
    let denom = F::one() + kappa;
    Ok(kappa / denom * los_sum.norm_sqr() + nlos_pow / denom)
}

/// Second moment of the direct-only channel (no surface contribution).
pub fn direct_expected_power<F: Real>(bs: Point3<F>, mu: Point3<F>, rf: &RfConstants<F>) -> F {
    if rf.direct_blocked {
        return F::zero();
    }
    let (amp, _) = direct_los_parts(bs, mu, rf);
    let kappa = rf.rician_kappa;
    if kappa.is_infinite() {
        return amp * amp;
    }
    let pl = nlos_pathloss(bs.dist(mu), rf);
    let denom = F::one() + kappa;
    kappa / denom * (amp * amp) + pl * pl / denom
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Side;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::{FRAC_PI_2, PI, TAU};

    const REL_TOL: f64 = 1e-12;

    fn rel_close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
    }

    fn test_panel(rows: u32, cols: u32) -> PanelGeometry<f64> {
        PanelGeometry::new(
            rows,
            cols,
            0.03,
            0.03,
            Point3::new(0.0, 0.0, 2.0),
            Point3::new(-1.0, 0.0, 0.0),
            2,
            4,
        )
        .unwrap()
    }

    fn dir(theta: f64) -> Direction<f64> {
        Direction { theta, phi: 0.0 }
    }

    #[test]
    fn arrival_pattern_cosine_cubed() {
        assert!(rel_close(pattern_arrival(&dir(PI / 3.0)), 0.125, REL_TOL));
        assert!(rel_close(pattern_arrival(&dir(0.0)), 1.0, REL_TOL));
    }

    #[test]
    fn departure_pattern_branches() {
        // In front of the panel the transmissive fraction is irrelevant.
        assert!(rel_close(
            pattern_departure(&dir(PI / 3.0), 0.2),
            0.125,
            REL_TOL
        ));
        // Behind the panel the mirrored lobe is scaled by epsilon.
        assert!(rel_close(
            pattern_departure(&dir(2.0 * PI / 3.0), 0.2),
            0.025,
            1e-9
        ));
        // Exactly broadside neither branch applies.
        assert_eq!(pattern_departure(&dir(FRAC_PI_2), 0.7), 0.0);
        // epsilon = 0 kills the transmissive branch entirely.
        assert_eq!(pattern_departure(&dir(2.0), 0.0), 0.0);
    }

    #[test]
    fn element_gain_magnitude_and_phase() {
        let panel = test_panel(10, 10);
        let mut rf = RfConstants::<f64>::default();
        rf.element_gain = 4.0;
        // Both patterns at 0.125 with 0.03 m pitch: |g| = sqrt(4 * 0.125 *
        // 0.125 * 0.0009) = 7.5e-3 exactly.
        let g = element_power_gain(&panel, &dir(PI / 3.0), &dir(PI / 3.0), 0.0, &rf);
        assert!(rel_close(g.re, 7.5e-3, 1e-12), "got {g}");
        assert!(g.im.abs() < 1e-18);
        // A phase shift of pi/2 rotates the gain to the negative imaginary
        // axis without changing its magnitude.
        let g2 = element_power_gain(&panel, &dir(PI / 3.0), &dir(PI / 3.0), FRAC_PI_2, &rf);
        assert!(rel_close(g2.norm(), 7.5e-3, 1e-12));
        assert!(rel_close(g2.im, -7.5e-3, 1e-9), "got {g2}");
    }

    #[test]
    fn nlos_pathloss_frozen_value() {
        let mut rf = RfConstants::<f64>::default();
        rf.nlos_ref_gain = 1.0e-4;
        rf.nlos_exponent = 3.5;
        let pl = nlos_pathloss(500.0, &rf);
        // Independently recomputed through base-10 logs.
        let oracle = 10f64.powf(0.5 * (-4.0) - 0.5 * 3.5 * 500f64.log10());
        assert!(rel_close(pl, 1.891483218006352e-7, 1e-12), "got {pl:e}");
        assert!(rel_close(pl, oracle, 1e-12));
    }

    #[test]
    fn direct_los_frozen_value() {
        let mut rf = RfConstants::<f64>::default();
        rf.alpha = 2.0;
        let bs = Point3::new(0.0, 0.0, 0.0);
        let mu = Point3::new(100.0, 0.0, 0.0);
        let h = direct_los(bs, mu, &rf);
        assert!(rel_close(h.norm(), 0.01, 1e-12), "|h| = {}", h.norm());
        // 100 m is 1666 + 2/3 wavelengths, so the wrapped phase is 2*pi/3.
        let want = 2.0943951023931955_f64;
        let got = wrap_angle(h.arg());
        assert!((got - want).abs() < 1e-9, "phase {got} vs {want}");
    }

    #[test]
    fn direct_path_blocked_is_zero() {
        let mut rf = RfConstants::<f64>::default();
        rf.direct_blocked = true;
        let bs = Point3::new(-500.0, 0.0, 2.0);
        let mu = Point3::new(1.0, 0.0, 2.0);
        assert_eq!(direct_los(bs, mu, &rf).norm(), 0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert_eq!(direct_channel(bs, mu, &rf, &mut rng).norm(), 0.0);
        assert_eq!(direct_expected_power(bs, mu, &rf), 0.0);
    }

    #[test]
    fn rician_limits() {
        let (a, b) = rician_weights(0.0_f64);
        assert_eq!((a, b), (0.0, 1.0));
        let (a, b) = rician_weights(f64::INFINITY);
        assert_eq!((a, b), (1.0, 0.0));
        let (a, b) = rician_weights(4.0_f64);
        assert!(rel_close(a * a + b * b, 1.0, REL_TOL));
        assert!(rel_close(a * a / (b * b), 4.0, REL_TOL));
    }

    #[test]
    fn pure_los_limit_removes_fading() {
        let mut rf = RfConstants::<f64>::default();
        rf.rician_kappa = f64::INFINITY;
        let bs = Point3::new(-500.0, 0.0, 2.0);
        let mu = Point3::new(0.8, 0.1, 2.0);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let h = direct_channel(bs, mu, &rf, &mut rng);
        let los = direct_los(bs, mu, &rf);
        assert_eq!(h, los, "kappa = inf must reproduce the LoS term");
    }

    #[test]
    fn composite_sums_exactly() {
        let panel = test_panel(3, 3);
        let rf = RfConstants::<f64>::default();
        let bs = Point3::new(-500.0, 0.0, 2.0);
        let mu = Point3::new(1.2, -0.4, 2.0);
        let psis = vec![0.5; 9];
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let c = composite_channel(&panel, bs, mu, &psis, &rf, &mut rng).unwrap();
        let mut sum = num_complex::Complex::new(0.0, 0.0);
        for h in &c.h_element {
            sum += *h;
        }
        sum += c.h_direct;
        assert_eq!(sum, c.h_total, "decomposition must sum exactly");
        for m in 0..9 {
            assert_eq!(
                c.h_element_los[m] + c.h_element_nlos[m],
                c.h_element[m],
                "element {m} parts must sum exactly"
            );
        }
        assert_eq!(c.h_direct_los + c.h_direct_nlos, c.h_direct);
    }

    #[test]
    fn shared_draws_reproduce() {
        let panel = test_panel(2, 2);
        let rf = RfConstants::<f64>::default();
        let bs = Point3::new(-500.0, 0.0, 2.0);
        let mu = Point3::new(-1.0, 0.2, 2.0);
        let psis = vec![0.0; 4];
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let draws = SmallScaleDraws::draw(4, &mut rng);
        let c1 = composite_channel_with_draws(&panel, bs, mu, &psis, &rf, &draws).unwrap();
        let c2 = composite_channel_with_draws(&panel, bs, mu, &psis, &rf, &draws).unwrap();
        assert_eq!(c1.h_total, c2.h_total, "same draws, same channel");
    }

    #[test]
    fn transmissive_side_gated_by_epsilon() {
        let panel = test_panel(4, 4);
        let bs = Point3::new(-500.0, 0.0, 2.0);
        // User behind the panel.
        let mu = Point3::new(1.0, 0.0, 2.0);
        assert_eq!(crate::geometry::side_of(&panel, mu).unwrap(), Side::Transmissive);
        let rf = RfConstants::<f64>::default();
        let h_on = element_channel_los(&panel, 1, bs, mu, 0.0, &rf).unwrap();
        assert!(h_on.norm() > 0.0);
        let rf_off = rf.reflector_baseline();
        let h_off = element_channel_los(&panel, 1, bs, mu, 0.0, &rf_off).unwrap();
        assert_eq!(h_off.norm(), 0.0, "epsilon = 0 must zero the LoS term");
        // On the reflective side epsilon does not enter at all.
        let mu_r = Point3::new(-1.0, 0.0, 2.0);
        let a = element_channel_los(&panel, 1, bs, mu_r, 0.3, &rf).unwrap();
        let b = element_channel_los(&panel, 1, bs, mu_r, 0.3, &rf_off).unwrap();
        assert_eq!(a, b, "reflective-side term must not depend on epsilon");
    }

    #[test]
    fn element_amplitude_frozen_value() {
        // Panel element at the center, user 0.5 m in front on the normal
        // axis, base station 500 m out on the same axis: both patterns are
        // essentially 1 and the amplitude reduces to
        // lambda * sqrt(dx*dy) / ((4pi)^1.5 * d1 * d2) with unit gains.
        let panel = PanelGeometry::new(
            1,
            1,
            0.03,
            0.03,
            Point3::new(0.0, 0.0, 2.0),
            Point3::new(-1.0, 0.0, 0.0),
            2,
            4,
        )
        .unwrap();
        let mut rf = RfConstants::<f64>::default();
        rf.element_gain = 4.0;
        let bs = Point3::new(-500.0, 0.0, 2.0);
        let mu = Point3::new(-0.5, 0.0, 2.0);
        let (amp, _) = element_los_parts(&panel, 1, bs, mu, &rf).unwrap();
        // The frozen value 4.0407102478162476e-8 was computed for |g| =
        // 7.5e-3 (both patterns at 0.125); here on-axis geometry makes both
        // patterns 1, giving |g| = 0.06, exactly 8x that gain.
        assert!(rel_close(amp, 8.0 * 4.0407102478162476e-8, 1e-12), "amp = {amp:e}");
    }

    #[test]
    fn expected_power_matches_monte_carlo() {
        let panel = test_panel(3, 3);
        let mut rf = RfConstants::<f64>::default();
        rf.rician_kappa = 4.0;
        let bs = Point3::new(-500.0, 0.0, 2.0);
        let mu = Point3::new(-0.7, 0.5, 2.0);
        let psis = vec![1.0; 9];
        let expect = expected_channel_power(&panel, bs, mu, &psis, &rf).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let n = 100_000;
        let mut acc = 0.0;
        for _ in 0..n {
            let c = composite_channel(&panel, bs, mu, &psis, &rf, &mut rng).unwrap();
            acc += c.h_total.norm_sqr();
        }
        let empirical = acc / n as f64;
        assert!(
            rel_close(expect, empirical, 0.02),
            "analytic {expect:e} vs empirical {empirical:e}"
        );
    }

    #[test]
    fn expected_power_limits() {
        let panel = test_panel(2, 2);
        let bs = Point3::new(-500.0, 0.0, 2.0);
        let mu = Point3::new(-0.9, -0.2, 2.0);
        let psis = vec![0.0; 4];
        // kappa = 0: only scattered power remains.
        let mut rf = RfConstants::<f64>::default();
        rf.rician_kappa = 0.0;
        let p0 = expected_channel_power(&panel, bs, mu, &psis, &rf).unwrap();
        let mut nlos = 0.0;
        for m in 1..=4 {
            let pos = panel.element_position(m);
            let pl = nlos_pathloss(bs.dist(pos), &rf) * nlos_pathloss(pos.dist(mu), &rf);
            nlos += pl * pl;
        }
        let pld = nlos_pathloss(bs.dist(mu), &rf);
        assert!(rel_close(p0, nlos + pld * pld, REL_TOL));
        // kappa = inf: only the coherent LoS composite remains.
        rf.rician_kappa = f64::INFINITY;
        let pinf = expected_channel_power(&panel, bs, mu, &psis, &rf).unwrap();
        let mut los = num_complex::Complex::new(0.0, 0.0);
        for m in 1..=4 {
            los += element_channel_los(&panel, m, bs, mu, 0.0, &rf).unwrap();
        }
        los += direct_los(bs, mu, &rf);
        assert!(rel_close(pinf, los.norm_sqr(), REL_TOL));
    }

    #[test]
    fn se_mapping() {
        let mut rf = RfConstants::<f64>::default();
        rf.tx_power = 10.0;
        rf.noise_power = 2.5118864315095801e-13;
        // SNR of exactly 1 gives one bit.
        let p = rf.noise_power / rf.tx_power;
        assert!(rel_close(se_from_power(p, &rf), 1.0, REL_TOL));
        assert_eq!(se_from_power(0.0, &rf), 0.0);
        let h = num_complex::Complex::new(3.0e-7, -4.0e-7);
        assert!(rel_close(
            spectral_efficiency(h, &rf),
            se_from_power(25.0e-14, &rf),
            REL_TOL
        ));
    }

    #[test]
    fn phase_shift_vector_realizes_grid() {
        let v = PhaseShiftVector::new(vec![0, 1, 2, 3], 4).unwrap();
        let psis: Vec<f64> = v.realized();
        for (l, psi) in psis.iter().enumerate() {
            assert!(rel_close(*psi, l as f64 * TAU / 4.0, REL_TOL));
        }
        assert!(PhaseShiftVector::new(vec![4], 4).is_err());
        assert!(PhaseShiftVector::new(vec![0], 0).is_err());
    }

    #[test]
    fn rf_validation_catches_bad_ranges() {
        let mut rf = RfConstants::<f64>::default();
        assert!(rf.validate().is_ok());
        rf.epsilon = 1.5;
        assert!(rf.validate().is_err());
        rf.epsilon = 1.0;
        rf.rician_kappa = -1.0;
        assert!(rf.validate().is_err());
        rf.rician_kappa = 4.0;
        rf.noise_power = 0.0;
        assert!(rf.validate().is_err());
    }
}

use crate::dsp;
use crate::{Error, Result};

/// Impulse-response window in samples.
pub const DEFAULT_IR_WINDOW: usize = 1024;

/// Estimated in-ear impulse response, peak-normalized.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelEstimate {
    pub response: Vec<f64>,
    /// max |h| before normalization.
    pub peak: f64,
}

/// Recovers the impulse response by circular cross-correlation of the
/// excitation `s` with the recording `r`:
///
/// `h(n) = sum_t s(t) r((t + n) mod N)` for `n` in `0..window`,
///
/// computed through the FFT, then scaled so that `max |h| == 1`.
pub fn estimate_channel(s: &[f64], r: &[f64], window: usize) -> Result<ChannelEstimate> {
    if s.len() != r.len() {
        return Err(Error::LengthMismatch {
            expected: s.len(),
            actual: r.len(),
        });
    }
    if window == 0 || window > s.len() {
        return Err(Error::invalid(format!(
            "response window {window} outside 1..={}",
            s.len()
        )));
    }
    if s.iter().all(|&v| v == 0.0) {
        return Err(Error::Degenerate("all-zero excitation".into()));
    }
    let n = s.len();
    let cross = dsp::spectrum(s, n)
        .into_iter()
        .zip(dsp::spectrum(r, n))
        .map(|(a, b)| a.conj() * b)
        .collect();
    let mut h = dsp::real_inverse(cross);
    h.truncate(window);

    let peak = h.iter().map(|v| v.abs()).fold(0.0, f64::max);
    if peak == 0.0 {
        return Err(Error::Degenerate("recording is uncorrelated with the excitation".into()));
    }
    h.iter_mut().for_each(|v| *v /= peak);
    Ok(ChannelEstimate { response: h, peak })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::excitation::{gen_excitation, ExcitationSpec};
    use proptest::prelude::*;

    fn argmax_abs(h: &[f64]) -> usize {
        h.iter()
            .enumerate()
            .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
            .unwrap()
            .0
    }

    fn delayed(s: &[f64], d: usize) -> Vec<f64> {
        let mut r = vec![0.0; s.len()];
        r[d..].copy_from_slice(&s[..s.len() - d]);
        r
    }

    #[test]
    fn unit_impulse_returns_the_recording() {
        let mut s = vec![0.0; 2048];
        s[0] = 1.0;
        let r: Vec<f64> = (0..2048).map(|i| ((i * 37 % 101) as f64 - 50.0) / 50.0).collect();
        let est = estimate_channel(&s, &r, 512).unwrap();
        for (h, x) in est.response.iter().zip(&r) {
            assert!((h * est.peak - x).abs() < 1e-9);
        }
    }

    #[test]
    fn mls_loopback_is_a_clean_spike() {
        let ex = gen_excitation(&ExcitationSpec::mls(48_000, 1.0, 7)).unwrap();
        let est = estimate_channel(&ex.samples, &ex.samples, DEFAULT_IR_WINDOW).unwrap();
        assert_eq!(argmax_abs(&est.response), 0);
        assert_eq!(est.response[0], 1.0);
        let side = est.response[1..].iter().map(|v| v.abs()).fold(0.0, f64::max);
        assert!(side < 0.05, "sidelobe {side}");
    }

    #[test]
    fn errors() {
        assert!(matches!(
            estimate_channel(&[0.0; 8], &[1.0; 8], 4),
            Err(Error::Degenerate(_))
        ));
        assert!(estimate_channel(&[1.0; 8], &[1.0; 7], 4).is_err());
    }

    #[test]
    fn recovers_every_delay_for_both_excitations() {
        let mls = gen_excitation(&ExcitationSpec::mls(48_000, 1.0, 1)).unwrap();
        let chirp = gen_excitation(&ExcitationSpec::default()).unwrap();
        for ex in [&mls, &chirp] {
            for d in (0..DEFAULT_IR_WINDOW).step_by(61).chain([DEFAULT_IR_WINDOW - 1]) {
                let est = estimate_channel(&ex.samples, &delayed(&ex.samples, d), DEFAULT_IR_WINDOW)
                    .unwrap();
                assert_eq!(argmax_abs(&est.response), d, "{:?}", ex.kind);
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn shift_covariance(d in 0usize..DEFAULT_IR_WINDOW, seed in any::<u64>()) {
            let ex = gen_excitation(&ExcitationSpec::mls(48_000, 0.5, seed)).unwrap();
            let est = estimate_channel(&ex.samples, &delayed(&ex.samples, d), DEFAULT_IR_WINDOW).unwrap();
            prop_assert_eq!(argmax_abs(&est.response), d);
        }
    }
}

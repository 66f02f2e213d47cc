//! Uplink channel synthesis: BPSK payloads, i.i.d. Rayleigh path gains and
//! circularly-symmetric AWGN, assembled as `y = H b + n`.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::linalg::{ComplexMatrix, ComplexVector, FlopCounter, LinalgError};

/// How an SNR in decibels maps onto the noise variance `N0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SnrConvention {
    /// Received SNR at each receive antenna: `SNR = Nt * Es / N0`. With
    /// unit-variance gains every receive antenna collects `Nt * Es` of signal
    /// power, so this is the physical per-antenna SNR.
    #[default]
    PerReceiveAntenna,
    /// Per transmitted symbol: `SNR = Es / N0`, ignoring how many users share
    /// the receive antenna. The receiver array gain then lifts every curve.
    PerSymbol,
}

impl std::str::FromStr for SnrConvention {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "per-receive-antenna" | "per_receive_antenna" | "rx" => Ok(Self::PerReceiveAntenna),
            "per-symbol" | "per_symbol" | "symbol" => Ok(Self::PerSymbol),
            other => Err(format!("unknown SNR convention '{other}'")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SnrConfig {
    pub snr_db: f64,
    /// Symbol energy; 1.0 for unit BPSK.
    pub es: f64,
    #[serde(default)]
    pub convention: SnrConvention,
}

impl SnrConfig {
    pub fn new(snr_db: f64) -> Self {
        Self {
            snr_db,
            es: 1.0,
            convention: SnrConvention::default(),
        }
    }

    pub fn with_convention(mut self, convention: SnrConvention) -> Self {
        self.convention = convention;
        self
    }

    /// Noise variance per complex receive sample for a system with `nt`
    /// transmitters.
    pub fn noise_variance(&self, nt: usize) -> f64 {
        let per_symbol = self.es * 10f64.powf(-self.snr_db / 10.0);
        match self.convention {
            SnrConvention::PerSymbol => per_symbol,
            SnrConvention::PerReceiveAntenna => nt as f64 * per_symbol,
        }
    }
}

/// One realization of the uplink model.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelInstance {
    /// `Nr x Nt` path gains.
    pub h: ComplexMatrix,
    /// Transmitted BPSK symbols, `±sqrt(Es)` on the real axis.
    pub b_true: ComplexVector,
    pub noise: ComplexVector,
    pub y: ComplexVector,
    pub n0: f64,
    pub es: f64,
}

impl ChannelInstance {
    pub fn nt(&self) -> usize {
        self.h.cols()
    }

    pub fn nr(&self) -> usize {
        self.h.rows()
    }

    /// Transmitted bits as ±1.
    pub fn bits(&self) -> Vec<f64> {
        self.b_true
            .iter()
            .map(|b| if b.re >= 0.0 { 1.0 } else { -1.0 })
            .collect()
    }
}

fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R, variance: f64) -> Complex64 {
    let scale = (variance / 2.0).sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(scale * re, scale * im)
}

/// `Nr x Nt` matrix of i.i.d. `CN(0, 1)` gains, drawn row by row.
pub fn sample_channel<R: Rng + ?Sized>(nt: usize, nr: usize, rng: &mut R) -> ComplexMatrix {
    ComplexMatrix::from_fn(nr, nt, |_, _| complex_gaussian(rng, 1.0))
}

pub fn sample_bpsk<R: Rng + ?Sized>(nt: usize, es: f64, rng: &mut R) -> ComplexVector {
    assert!(es > 0.0, "symbol energy must be positive");
    let amplitude = es.sqrt();
    (0..nt)
        .map(|_| {
            let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
            Complex64::new(sign * amplitude, 0.0)
        })
        .collect()
}

pub fn sample_noise<R: Rng + ?Sized>(nr: usize, n0: f64, rng: &mut R) -> ComplexVector {
    (0..nr).map(|_| complex_gaussian(rng, n0)).collect()
}

pub fn assemble<R: Rng + ?Sized>(
    h: ComplexMatrix,
    b_true: ComplexVector,
    snr: &SnrConfig,
    rng: &mut R,
) -> Result<ChannelInstance, LinalgError> {
    let n0 = snr.noise_variance(h.cols());
    assemble_with_noise_variance(h, b_true, n0, snr.es, rng)
}

/// Like [`assemble`] with an explicit `N0`; `n0 == 0` gives a noiseless
/// instance.
pub fn assemble_with_noise_variance<R: Rng + ?Sized>(
    h: ComplexMatrix,
    b_true: ComplexVector,
    n0: f64,
    es: f64,
    rng: &mut R,
) -> Result<ChannelInstance, LinalgError> {
    assert!(n0 >= 0.0, "noise variance must be non-negative");
    let hb = h.mat_vec(&b_true, &mut FlopCounter::new())?;
    let noise = sample_noise(h.rows(), n0, rng);
    let y = hb.iter().zip(noise.iter()).map(|(s, n)| s + n).collect();
    Ok(ChannelInstance {
        h,
        b_true,
        noise,
        y,
        n0,
        es,
    })
}

/// `||h_k||^2 / E[||h_k||^2]` for each receive antenna (row) `k`, with
/// `E[||h_k||^2] = Nt` under unit-variance gains.
pub fn hardening_metric(h: &ComplexMatrix) -> Vec<f64> {
    let nt = h.cols() as f64;
    (0..h.rows())
        .map(|k| h.row(k).iter().map(|z| z.norm_sqr()).sum::<f64>() / nt)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn mean_var(xs: &[f64]) -> (f64, f64) {
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
        (mean, var)
    }

    #[test]
    fn channel_entries_have_unit_variance() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let h = sample_channel(100, 1000, &mut rng);
        let power: Vec<f64> = h.as_slice().iter().map(|z| z.norm_sqr()).collect();
        let (mean_power, _) = mean_var(&power);
        assert!((0.99..=1.01).contains(&mean_power), "{mean_power}");

        let re: Vec<f64> = h.as_slice().iter().map(|z| z.re).collect();
        let im: Vec<f64> = h.as_slice().iter().map(|z| z.im).collect();
        for part in [re, im] {
            let (m, v) = mean_var(&part);
            assert!(m.abs() < 0.01);
            assert!((v - 0.5).abs() < 0.01, "{v}");
        }
    }

    #[test]
    fn sampling_is_seed_deterministic() {
        let a = sample_channel(4, 6, &mut ChaCha8Rng::seed_from_u64(3));
        let b = sample_channel(4, 6, &mut ChaCha8Rng::seed_from_u64(3));
        assert_eq!(a, b);
        let x = sample_bpsk(32, 1.0, &mut ChaCha8Rng::seed_from_u64(3));
        let z = sample_bpsk(32, 1.0, &mut ChaCha8Rng::seed_from_u64(3));
        assert_eq!(x, z);
    }

    #[test]
    fn bpsk_symbols_are_balanced() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let b = sample_bpsk(100_000, 1.0, &mut rng);
        assert!(b.iter().all(|z| (z.re == 1.0 || z.re == -1.0) && z.im == 0.0));
        let mean = b.iter().map(|z| z.re).sum::<f64>() / b.len() as f64;
        assert!(mean.abs() <= 0.02, "{mean}");

        let scaled = sample_bpsk(10, 4.0, &mut rng);
        assert!(scaled.iter().all(|z| z.re.abs() == 2.0));
    }

    #[test]
    fn noiseless_assembly_is_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let h = sample_channel(3, 5, &mut rng);
        let b = sample_bpsk(3, 1.0, &mut rng);
        let inst = assemble_with_noise_variance(h.clone(), b.clone(), 0.0, 1.0, &mut rng).unwrap();
        let hb = h.mat_vec(&b, &mut FlopCounter::new()).unwrap();
        assert_eq!(inst.y, hb);
    }

    #[test]
    fn scalar_assembly() {
        let h = ComplexMatrix::identity(1);
        let b = ComplexVector::from_real(&[1.0]);
        let inst =
            assemble_with_noise_variance(h, b, 0.0, 1.0, &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
        assert_eq!(inst.y[0], Complex64::new(1.0, 0.0));
        assert_eq!(inst.bits(), vec![1.0]);
    }

    #[test]
    fn reconstruction_identity_holds() {
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        for _ in 0..20 {
            let h = sample_channel(4, 4, &mut rng);
            let b = sample_bpsk(4, 1.0, &mut rng);
            let inst = assemble(h, b, &SnrConfig::new(5.0), &mut rng).unwrap();
            let hb = inst.h.mat_vec(&inst.b_true, &mut FlopCounter::new()).unwrap();
            let rebuilt: ComplexVector =
                hb.iter().zip(inst.noise.iter()).map(|(s, n)| s + n).collect();
            assert_eq!(inst.y.max_abs_diff(&rebuilt), 0.0);
        }
    }

    #[test]
    fn noise_variance_matches_n0() {
        let mut rng = ChaCha8Rng::seed_from_u64(15);
        let snr = SnrConfig::new(3.0).with_convention(SnrConvention::PerSymbol);
        let n0 = snr.noise_variance(1);
        let h = ComplexMatrix::identity(1);
        let mut samples = Vec::with_capacity(100_000);
        for _ in 0..100_000 {
            let inst = assemble(h.clone(), ComplexVector::from_real(&[1.0]), &snr, &mut rng).unwrap();
            samples.push(inst.noise[0].norm_sqr());
        }
        let (mean, _) = mean_var(&samples);
        assert!((mean / n0 - 1.0).abs() < 0.02, "{mean} vs {n0}");
    }

    #[test]
    fn snr_mapping() {
        let rx = SnrConfig::new(10.0);
        assert!((rx.noise_variance(32) - 3.2).abs() < 1e-12);
        let sym = rx.with_convention(SnrConvention::PerSymbol);
        assert!((sym.noise_variance(32) - 0.1).abs() < 1e-12);
        // both conventions agree for a single transmitter
        assert_eq!(rx.noise_variance(1), sym.noise_variance(1));
        let mut last = f64::INFINITY;
        for db in -10..=40 {
            let n0 = SnrConfig::new(db as f64).noise_variance(8);
            assert!(n0 > 0.0 && n0 < last);
            last = n0;
        }
    }

    #[test]
    fn hardening_metric_examples() {
        let ones = ComplexMatrix::from_fn(1, 4, |_, _| Complex64::new(1.0, 0.0));
        assert_eq!(hardening_metric(&ones), vec![1.0]);

        let mut rng = ChaCha8Rng::seed_from_u64(16);
        let siso: Vec<f64> = (0..10_000)
            .flat_map(|_| hardening_metric(&sample_channel(1, 1, &mut rng)))
            .collect();
        let (mean, _) = mean_var(&siso);
        assert!((mean - 1.0).abs() < 0.03, "{mean}");
    }

    #[test]
    fn hardening_concentrates_with_more_transmitters() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let spread = |nt: usize, rng: &mut ChaCha8Rng| {
            let xs: Vec<f64> = (0..2000)
                .flat_map(|_| hardening_metric(&sample_channel(nt, 1, rng)))
                .collect();
            mean_var(&xs).1.sqrt()
        };
        assert!(spread(256, &mut rng) < spread(16, &mut rng));
    }
}

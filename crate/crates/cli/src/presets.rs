//! Named grids, one per published figure.

use clap::ValueEnum;
use mimo_slas::detectors::DetectorKind;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Preset {
    /// BER vs SNR, 32x32, every detector with and without LAS
    Fig1,
    /// BER vs antenna count at 15 dB, 256 steps
    Fig2,
    /// likelihood per step, 128x128 MF-LAS at 5/10/20 dB
    Fig3,
    /// BER per step, 64x64 MF-LAS, 320 steps, 10 to 40 dB
    Fig4,
    /// BER vs SNR for rho 0.7 to 1.3, 32x32 MF-LAS, 96 steps
    Fig5,
    /// BER per step for rho 0.8 to 1.3, 64x64, 256 steps, 15 dB
    Fig6,
    /// BER vs rho for 16 to 128 antennas, 256 steps, 10 dB
    Fig7,
    /// BER vs rho for 32 antennas at 0/5/10 dB, 100 steps
    Fig8,
    /// flop counts vs antennas and steps
    Fig9,
    /// wall-clock time vs antennas
    Fig10,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BerGrid {
    pub experiment: String,
    pub nt: Vec<usize>,
    pub nr: Option<Vec<usize>>,
    pub snr_db: Vec<f64>,
    pub rho: Vec<f64>,
    pub detectors: Vec<DetectorKind>,
    pub las: Vec<bool>,
    pub n_f: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceGrid {
    pub experiment: String,
    pub nt: usize,
    pub nr: usize,
    pub snr_db: Vec<f64>,
    pub rho: Vec<f64>,
    pub detector: DetectorKind,
    pub n_f: usize,
    pub trials: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComplexityGrid {
    pub experiment: String,
    pub n: Vec<usize>,
    pub n_f: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Grid {
    Ber(BerGrid),
    Trace(TraceGrid),
    Flops(ComplexityGrid),
    Bench(ComplexityGrid),
}

fn powers_of_two() -> Vec<usize> {
    (0..=8).map(|k| 1 << k).collect()
}

fn steps(start: f64, step: f64, count: usize) -> Vec<f64> {
    (0..count).map(|k| ((start + k as f64 * step) * 1e9).round() / 1e9).collect()
}

impl Preset {
    pub fn name(&self) -> &'static str {
        match self {
            Preset::Fig1 => "fig1",
            Preset::Fig2 => "fig2",
            Preset::Fig3 => "fig3",
            Preset::Fig4 => "fig4",
            Preset::Fig5 => "fig5",
            Preset::Fig6 => "fig6",
            Preset::Fig7 => "fig7",
            Preset::Fig8 => "fig8",
            Preset::Fig9 => "fig9",
            Preset::Fig10 => "fig10",
        }
    }

    pub fn grid(&self) -> Grid {
        let experiment = self.name().to_string();
        let mf = vec![DetectorKind::Mf];
        match self {
            Preset::Fig1 => Grid::Ber(BerGrid {
                experiment,
                nt: vec![32],
                nr: None,
                snr_db: steps(0.0, 5.0, 9),
                rho: vec![1.0],
                detectors: DetectorKind::ALL.to_vec(),
                las: vec![false, true],
                n_f: 100,
            }),
            Preset::Fig2 => Grid::Ber(BerGrid {
                experiment,
                nt: powers_of_two(),
                nr: None,
                snr_db: vec![15.0],
                rho: vec![1.0],
                detectors: DetectorKind::ALL.to_vec(),
                las: vec![false, true],
                n_f: 256,
            }),
            Preset::Fig5 => Grid::Ber(BerGrid {
                experiment,
                nt: vec![32],
                nr: None,
                snr_db: steps(0.0, 5.0, 9),
                rho: steps(0.7, 0.1, 7),
                detectors: mf,
                las: vec![false, true],
                n_f: 96,
            }),
            Preset::Fig7 => Grid::Ber(BerGrid {
                experiment,
                nt: vec![16, 32, 64, 128],
                nr: None,
                snr_db: vec![10.0],
                rho: steps(0.8, 0.05, 9),
                detectors: mf,
                las: vec![true],
                n_f: 256,
            }),
            Preset::Fig8 => Grid::Ber(BerGrid {
                experiment,
                nt: vec![32],
                nr: None,
                snr_db: vec![0.0, 5.0, 10.0],
                rho: steps(0.8, 0.05, 9),
                detectors: mf,
                las: vec![true],
                n_f: 100,
            }),
            Preset::Fig3 => Grid::Trace(TraceGrid {
                experiment,
                nt: 128,
                nr: 128,
                snr_db: vec![5.0, 10.0, 20.0],
                rho: vec![1.0],
                detector: DetectorKind::Mf,
                n_f: 128,
                trials: 1000,
            }),
            Preset::Fig4 => Grid::Trace(TraceGrid {
                experiment,
                nt: 64,
                nr: 64,
                snr_db: vec![10.0, 20.0, 30.0, 40.0],
                rho: vec![1.0],
                detector: DetectorKind::Mf,
                n_f: 320,
                trials: 1000,
            }),
            Preset::Fig6 => Grid::Trace(TraceGrid {
                experiment,
                nt: 64,
                nr: 64,
                snr_db: vec![15.0],
                rho: steps(0.8, 0.1, 6),
                detector: DetectorKind::Mf,
                n_f: 256,
                trials: 1000,
            }),
            Preset::Fig9 => Grid::Flops(ComplexityGrid {
                experiment,
                n: powers_of_two(),
                n_f: powers_of_two(),
            }),
            Preset::Fig10 => Grid::Bench(ComplexityGrid {
                experiment,
                n: powers_of_two(),
                n_f: vec![256],
            }),
        }
    }

    pub fn ber(&self) -> Option<BerGrid> {
        match self.grid() {
            Grid::Ber(g) => Some(g),
            _ => None,
        }
    }

    pub fn trace(&self) -> Option<TraceGrid> {
        match self.grid() {
            Grid::Trace(g) => Some(g),
            _ => None,
        }
    }

    pub fn flops(&self) -> Option<ComplexityGrid> {
        match self.grid() {
            Grid::Flops(g) => Some(g),
            _ => None,
        }
    }

    pub fn bench(&self) -> Option<ComplexityGrid> {
        match self.grid() {
            Grid::Bench(g) => Some(g),
            _ => None,
        }
    }
}

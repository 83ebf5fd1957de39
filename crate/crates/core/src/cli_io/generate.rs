//! Seeded synthetic coefficient corpora.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Geometric};

use super::stream::{AuxElement, CoefficientStream, DEFAULT_LOG2_TR_RANGE};
use super::StreamError;
use crate::coeffmodel::{check_dims, CodingMode, CodingTables, SubBlock};
use crate::crypto::{AuxCode, AuxKind};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ModeChoice {
    Tc,
    Ts,
    /// Alternates TC and TS.
    Mixed,
}

/// Distribution of nonzero magnitudes, always capped at `max_abs`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Magnitude {
    Uniform { max_abs: u32 },
    /// `1 + Geometric(p)` with mean `mean`.
    Geometric { mean: f64, max_abs: u32 },
}

impl Magnitude {
    pub fn max_abs(self) -> u32 {
        match self {
            Magnitude::Uniform { max_abs } | Magnitude::Geometric { max_abs, .. } => max_abs,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GenConfig {
    pub seed: u64,
    pub count: usize,
    /// Block sizes, cycled in order.
    pub sizes: Vec<(usize, usize)>,
    pub mode: ModeChoice,
    pub magnitude: Magnitude,
    /// Probability of a zero coefficient.
    pub zero_prob: f64,
    pub aux_count: usize,
    pub log2_tr_range: u32,
}

impl Default for GenConfig {
    fn default() -> Self {
        Self {
            seed: 1,
            count: 100,
            sizes: vec![(4, 4), (2, 8), (8, 2)],
            mode: ModeChoice::Mixed,
            magnitude: Magnitude::Uniform { max_abs: 1024 },
            zero_prob: 0.3,
            aux_count: 0,
            log2_tr_range: DEFAULT_LOG2_TR_RANGE,
        }
    }
}

/// Largest element value drawn for exp-Golomb coded elements.
const EGK_VALUE_MAX: u64 = 4095;

fn config_err(msg: String) -> StreamError {
    StreamError::Format(msg)
}

pub fn generate(cfg: &GenConfig, tables: &CodingTables) -> Result<CoefficientStream, StreamError> {
    let max_abs = cfg.magnitude.max_abs();
    if max_abs == 0 || u64::from(max_abs) >= 1u64 << cfg.log2_tr_range {
        return Err(config_err(format!("magnitude cap {max_abs} must be in [1, 2^{})", cfg.log2_tr_range)));
    }
    if !(0.0..=1.0).contains(&cfg.zero_prob) {
        return Err(config_err(format!("zero probability {} outside [0, 1]", cfg.zero_prob)));
    }
    if cfg.count > 0 && cfg.sizes.is_empty() {
        return Err(config_err("no block sizes given".into()));
    }
    for &(w, h) in &cfg.sizes {
        check_dims(w, h)?;
    }
    let geometric = match cfg.magnitude {
        Magnitude::Geometric { mean, .. } if mean >= 1.0 => Some(Geometric::new(1.0 / mean).expect("p in (0, 1]")),
        Magnitude::Geometric { mean, .. } => return Err(config_err(format!("geometric mean {mean} below 1"))),
        Magnitude::Uniform { .. } => None,
    };

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut stream = CoefficientStream::new(cfg.log2_tr_range, tables);
    for i in 0..cfg.count {
        let (w, h) = cfg.sizes[i % cfg.sizes.len()];
        let mode = match cfg.mode {
            ModeChoice::Tc => CodingMode::Transform,
            ModeChoice::Ts => CodingMode::TransformSkip,
            ModeChoice::Mixed if i % 2 == 0 => CodingMode::Transform,
            ModeChoice::Mixed => CodingMode::TransformSkip,
        };
        let coeffs = (0..w * h)
            .map(|_| {
                if rng.gen_bool(cfg.zero_prob) {
                    return 0;
                }
                let m = match geometric {
                    Some(g) => (g.sample(&mut rng) + 1).min(u64::from(max_abs)) as i32,
                    None => rng.gen_range(1..=max_abs) as i32,
                };
                if rng.gen_bool(0.5) {
                    -m
                } else {
                    m
                }
            })
            .collect();
        stream.blocks.push(SubBlock::new(w, h, mode, coeffs)?);
    }
    for _ in 0..cfg.aux_count {
        let kind = *AuxKind::ALL.choose(&mut rng).expect("nonempty");
        let value = match kind.code() {
            AuxCode::Fl { c_max } => rng.gen_range(0..=c_max),
            AuxCode::Egk { .. } => rng.gen_range(0..=EGK_VALUE_MAX),
        };
        stream.aux.push(AuxElement { kind, value });
    }
    Ok(stream)
}

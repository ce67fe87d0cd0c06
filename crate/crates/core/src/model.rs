//! Honest device behaviour: input distributions, outcome statistics, CHSH
//! scoring and the completeness threshold.

use std::fmt;
use std::str::FromStr;

use num_rational::Ratio;
use rand::Rng;
use thiserror::Error;

/// The five setting pairs the protocol can produce, in table order.
pub const SETTING_PAIRS: [(u8, u8); 5] = [(0, 0), (0, 1), (1, 0), (1, 1), (0, 2)];

/// Characterisation table measured on the two-ion link, rows indexed like
/// [`SETTING_PAIRS`], entries `[p00, p01, p10, p11]` (Alice's outcome first,
/// Alice's outcomes already inverted).
pub const MEASURED_TABLE: [[f64; 4]; 5] = [
    [0.415, 0.0688, 0.0961, 0.420],
    [0.439, 0.0805, 0.0735, 0.4068],
    [0.3928, 0.0916, 0.0851, 0.431],
    [0.0820, 0.437, 0.3970, 0.0841],
    [0.5017, 0.00339, 0.0110, 0.4839],
];

/// Tables within this distance of unit mass are renormalised on load.
pub const RENORMALISE_TOLERANCE: f64 = 1e-3;

#[derive(Debug, Error, PartialEq)]
pub enum ModelError {
    #[error("invalid setting pair ({0}, {1})")]
    InvalidSetting(u8, u8),
    #[error("CHSH score {0} outside (2, 2√2]")]
    InvalidScore(f64),
    #[error("QBER {0} outside [0, 1/2)")]
    InvalidQber(f64),
    #[error("probability table for setting ({x}, {y}) sums to {sum}")]
    Unnormalised { x: u8, y: u8, sum: f64 },
    #[error("negative probability in table for setting ({0}, {1})")]
    NegativeEntry(u8, u8),
    #[error("no {0} rounds: statistic undefined")]
    UndefinedStatistic(&'static str),
    #[error("threshold infeasible: q_thresh {q_thresh} >= gamma {gamma}")]
    Infeasible { q_thresh: f64, gamma: f64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("table parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

/// Honest statistics source.
#[derive(Debug, Clone, PartialEq)]
pub enum DeviceModel {
    /// Two-parameter model: CHSH score `s` and key-round error rate `q`.
    Parametric { s: f64, q: f64 },
    /// Explicit `P(a,b|x,y)` tables in [`SETTING_PAIRS`] order.
    Empirical { table: [[f64; 4]; 5] },
}

fn pair_index(x: u8, y: u8) -> Result<usize, ModelError> {
    SETTING_PAIRS
        .iter()
        .position(|&p| p == (x, y))
        .ok_or(ModelError::InvalidSetting(x, y))
}

impl DeviceModel {
    pub fn parametric(s: f64, q: f64) -> Result<Self, ModelError> {
        if !(s > 2.0 && s <= 2.0 * std::f64::consts::SQRT_2 + 1e-12) {
            return Err(ModelError::InvalidScore(s));
        }
        if !(0.0..0.5).contains(&q) {
            return Err(ModelError::InvalidQber(q));
        }
        Ok(Self::Parametric { s, q })
    }

    /// Builds an empirical model, renormalising tables that are off by at
    /// most [`RENORMALISE_TOLERANCE`].
    ///
    /// With `invert_alice` the rows of every table are swapped, i.e. Alice's
    /// outcome labels are flipped.
    pub fn empirical(mut table: [[f64; 4]; 5], invert_alice: bool) -> Result<Self, ModelError> {
        for (row, &(x, y)) in table.iter_mut().zip(SETTING_PAIRS.iter()) {
            if row.iter().any(|&p| p < 0.0 || !p.is_finite()) {
                return Err(ModelError::NegativeEntry(x, y));
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > RENORMALISE_TOLERANCE {
                return Err(ModelError::Unnormalised { x, y, sum });
            }
            for p in row.iter_mut() {
                *p /= sum;
            }
            if invert_alice {
                *row = [row[2], row[3], row[0], row[1]];
            }
        }
        Ok(Self::Empirical { table })
    }

    /// Parses the plain-text table format: five lines `x y p00 p01 p10 p11`.
    /// Blank lines and `#` comments are ignored.
    pub fn parse_table(text: &str) -> Result<[[f64; 4]; 5], ModelError> {
        let mut table = [[f64::NAN; 4]; 5];
        let mut seen = [false; 5];
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |msg: &str| ModelError::Parse { line: lineno + 1, msg: msg.to_string() };
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != 6 {
                return Err(err("expected `x y p00 p01 p10 p11`"));
            }
            let x: u8 = fields[0].parse().map_err(|_| err("bad x"))?;
            let y: u8 = fields[1].parse().map_err(|_| err("bad y"))?;
            let idx = pair_index(x, y).map_err(|e| err(&e.to_string()))?;
            if seen[idx] {
                return Err(err("duplicate setting pair"));
            }
            seen[idx] = true;
            for k in 0..4 {
                table[idx][k] = fields[2 + k].parse().map_err(|_| err("bad probability"))?;
            }
        }
        if let Some(missing) = seen.iter().position(|s| !s) {
            let (x, y) = SETTING_PAIRS[missing];
            return Err(ModelError::Parse { line: 0, msg: format!("missing setting pair ({x}, {y})") });
        }
        Ok(table)
    }

    /// `P(a, b | x, y)`.
    pub fn joint_prob(&self, a: u8, b: u8, x: u8, y: u8) -> Result<f64, ModelError> {
        let idx = pair_index(x, y)?;
        if a > 1 || b > 1 {
            return Err(ModelError::InvalidArgument(format!("outcomes must be bits, got ({a}, {b})")));
        }
        Ok(match self {
            Self::Parametric { s, q } => {
                let parity = (a ^ b) & 1;
                if y == 2 {
                    let delta = if a == b { 1.0 } else { 0.0 };
                    let sign = if parity == 0 { 1.0 } else { -1.0 };
                    (delta - sign * q) / 2.0
                } else {
                    let sign = if (parity ^ (x & y)) == 0 { 1.0 } else { -1.0 };
                    (1.0 + sign * s / 4.0) / 4.0
                }
            }
            Self::Empirical { table } => table[idx][(2 * a + b) as usize],
        })
    }

    /// Full table for one setting pair, `[p00, p01, p10, p11]`.
    pub fn table_for(&self, x: u8, y: u8) -> Result<[f64; 4], ModelError> {
        let mut row = [0.0; 4];
        for (k, p) in row.iter_mut().enumerate() {
            *p = self.joint_prob((k / 2) as u8, (k % 2) as u8, x, y)?;
        }
        Ok(row)
    }

    /// Expected CHSH winning probability averaged over the four test settings.
    pub fn expected_winning_probability(&self) -> f64 {
        let mut total = 0.0;
        for &(x, y) in &SETTING_PAIRS[..4] {
            for a in 0..2u8 {
                for b in 0..2u8 {
                    if a ^ b == x & y {
                        total += self.joint_prob(a, b, x, y).unwrap();
                    }
                }
            }
        }
        total / 4.0
    }

    /// Expected key-round error rate `P(a != b | 0, 2)`.
    pub fn expected_qber(&self) -> f64 {
        self.joint_prob(0, 1, 0, 2).unwrap() + self.joint_prob(1, 0, 0, 2).unwrap()
    }

    /// Draws `(a, b)` for the given settings.
    pub fn sample_outcomes<R: Rng + ?Sized>(&self, x: u8, y: u8, rng: &mut R) -> Result<(u8, u8), ModelError> {
        let row = self.table_for(x, y)?;
        let u: f64 = rng.random();
        let mut acc = 0.0;
        for (k, p) in row.iter().enumerate() {
            acc += p;
            if u < acc {
                return Ok(((k / 2) as u8, (k % 2) as u8));
            }
        }
        Ok((1, 1))
    }
}

/// Input distributions: Alice uniform, Bob tests with probability `gamma`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct InputPolicy {
    pub gamma: Ratio<u64>,
}

impl InputPolicy {
    pub fn new(gamma: Ratio<u64>) -> Result<Self, ModelError> {
        if *gamma.numer() == 0 || gamma > Ratio::from_integer(1) {
            return Err(ModelError::InvalidArgument(format!("gamma {gamma} outside (0, 1]")));
        }
        Ok(Self { gamma })
    }

    pub fn gamma_f64(&self) -> f64 {
        *self.gamma.numer() as f64 / *self.gamma.denom() as f64
    }

    /// Exact probabilities `[P(Y=0), P(Y=1), P(Y=2)]`.
    pub fn bob_distribution(&self) -> [Ratio<u64>; 3] {
        let half = self.gamma / 2;
        [half, half, Ratio::from_integer(1) - self.gamma]
    }

    pub fn alice_distribution(&self) -> [Ratio<u64>; 2] {
        [Ratio::new(1, 2), Ratio::new(1, 2)]
    }

    pub fn sample_x<R: Rng + ?Sized>(&self, rng: &mut R) -> u8 {
        rng.random_range(0..2u8)
    }

    /// Samples Bob's setting with exact integer arithmetic on `gamma`.
    pub fn sample_y<R: Rng + ?Sized>(&self, rng: &mut R) -> u8 {
        let num = *self.gamma.numer();
        let den = *self.gamma.denom();
        let r = rng.random_range(0..2 * den);
        if r < num {
            0
        } else if r < 2 * num {
            1
        } else {
            2
        }
    }
}

/// Parses `NUM/DEN` or a plain integer.
pub fn parse_ratio(s: &str) -> Result<Ratio<u64>, ModelError> {
    let bad = || ModelError::InvalidArgument(format!("expected NUM/DEN, got `{s}`"));
    match s.split_once('/') {
        Some((n, d)) => {
            let n: u64 = n.trim().parse().map_err(|_| bad())?;
            let d: u64 = d.trim().parse().map_err(|_| bad())?;
            if d == 0 {
                return Err(bad());
            }
            Ok(Ratio::new(n, d))
        }
        None => Ok(Ratio::from_integer(s.trim().parse().map_err(|_| bad())?)),
    }
}

/// Score of a round: `None` for key rounds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Score {
    Lost,
    Won,
    NotTested,
}

impl Score {
    pub fn from_round(t: u8, a: u8, b: u8, x: u8, y: u8) -> Self {
        if t == 0 {
            Score::NotTested
        } else if a ^ b == x & y {
            Score::Won
        } else {
            Score::Lost
        }
    }
}

impl fmt::Display for Score {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Score::Lost => write!(f, "0"),
            Score::Won => write!(f, "1"),
            Score::NotTested => write!(f, "⊥"),
        }
    }
}

/// One measurement round as seen by an omniscient observer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RoundData {
    pub index: usize,
    pub x: u8,
    pub y: u8,
    pub t: u8,
    pub a: u8,
    pub b: u8,
    pub u: Score,
}

/// Samples one round (steps 1-3 plus the step-6 score on the true `a`).
pub fn sample_round<R: Rng + ?Sized>(
    index: usize,
    model: &DeviceModel,
    policy: &InputPolicy,
    rng: &mut R,
) -> RoundData {
    let mut x = policy.sample_x(rng);
    let y = policy.sample_y(rng);
    let t = u8::from(y != 2);
    if t == 0 {
        x = 0;
    }
    let (a, b) = model.sample_outcomes(x, y, rng).expect("valid setting pair by construction");
    RoundData { index, x, y, t, a, b, u: Score::from_round(t, a, b, x, y) }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChshStatistics {
    pub omega: f64,
    pub s: f64,
    pub qber: f64,
    pub test_rounds: usize,
    pub key_rounds: usize,
}

/// Winning probability, CHSH score and observed QBER.
pub fn chsh_statistics(rounds: &[RoundData]) -> Result<ChshStatistics, ModelError> {
    let (mut tests, mut wins, mut keys, mut errors) = (0usize, 0usize, 0usize, 0usize);
    for r in rounds {
        if r.t == 1 {
            tests += 1;
            wins += usize::from(r.u == Score::Won);
        } else {
            keys += 1;
            errors += usize::from(r.a != r.b);
        }
    }
    if tests == 0 {
        return Err(ModelError::UndefinedStatistic("test"));
    }
    if keys == 0 {
        return Err(ModelError::UndefinedStatistic("key"));
    }
    let omega = wins as f64 / tests as f64;
    Ok(ChshStatistics {
        omega,
        s: 4.0 * (2.0 * omega - 1.0),
        qber: errors as f64 / keys as f64,
        test_rounds: tests,
        key_rounds: keys,
    })
}

/// Threshold winning probability allowing `k` standard deviations of the
/// lost-test-round fraction above its expectation.
pub fn completeness_threshold(omega: f64, gamma: f64, n: f64, k: f64) -> Result<f64, ModelError> {
    if !(omega > 0.75 && omega <= 1.0) {
        return Err(ModelError::InvalidArgument(format!("omega {omega} outside (3/4, 1]")));
    }
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(ModelError::InvalidArgument(format!("gamma {gamma} outside (0, 1)")));
    }
    if !(n >= 1.0) || k < 0.0 {
        return Err(ModelError::InvalidArgument(format!("need n >= 1 and k >= 0, got n={n} k={k}")));
    }
    let q = gamma * (1.0 - omega);
    let q_thresh = q + k * (q * (1.0 - q) / n).sqrt();
    if q_thresh >= gamma {
        return Err(ModelError::Infeasible { q_thresh, gamma });
    }
    Ok(1.0 - q_thresh / gamma)
}

impl FromStr for DeviceModel {
    type Err = ModelError;

    /// Accepts `S,Q` for the parametric model.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (a, b) = s
            .split_once(',')
            .ok_or_else(|| ModelError::InvalidArgument(format!("expected `S,Q`, got `{s}`")))?;
        let parse = |v: &str| {
            v.trim()
                .parse::<f64>()
                .map_err(|_| ModelError::InvalidArgument(format!("bad number `{v}`")))
        };
        Self::parametric(parse(a)?, parse(b)?)
    }
}

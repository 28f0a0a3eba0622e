use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::layers::Activation;

/// Which feature classes feed the network. A class that is not used has no
/// branch at all (no parameters, no merge).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FeatureSet {
    Mbe,
    Domfreq,
    Both,
}

impl FeatureSet {
    pub fn uses_mbe(self) -> bool {
        matches!(self, FeatureSet::Mbe | FeatureSet::Both)
    }

    pub fn uses_domfreq(self) -> bool {
        matches!(self, FeatureSet::Domfreq | FeatureSet::Both)
    }
}

impl FromStr for FeatureSet {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "mbe" => Ok(FeatureSet::Mbe),
            "domfreq" | "dom-freq" => Ok(FeatureSet::Domfreq),
            "both" => Ok(FeatureSet::Both),
            other => Err(Error::Config(format!(
                "unknown feature set `{other}` (expected mbe, domfreq or both)"
            ))),
        }
    }
}

impl std::fmt::Display for FeatureSet {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            FeatureSet::Mbe => "mbe",
            FeatureSet::Domfreq => "domfreq",
            FeatureSet::Both => "both",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CbrnnConfig {
    pub features: FeatureSet,
    pub frames: usize,
    pub mbe_bands: usize,
    /// Dominant-frequency slots: 3 for plain clips, 6 once blocks-mixed.
    pub domfreq_slots: usize,
    pub n_filters: usize,
    pub n_cnn_layers: usize,
    pub receptive_field: usize,
    pub pool_time: Vec<usize>,
    pub pool_freq_mbe: Vec<usize>,
    pub pool_freq_domfreq: Vec<usize>,
    pub rnn_layers: usize,
    pub rnn_units: usize,
    pub fc_layers: usize,
    pub fc_units: usize,
    pub fc_activation: Activation,
    pub maxout_pieces: usize,
    pub dropout: f64,
}

impl Default for CbrnnConfig {
    fn default() -> Self {
        Self {
            features: FeatureSet::Both,
            frames: 500,
            mbe_bands: 40,
            domfreq_slots: 3,
            n_filters: 8,
            n_cnn_layers: 2,
            receptive_field: 3,
            pool_time: vec![10, 10],
            pool_freq_mbe: vec![5, 8],
            pool_freq_domfreq: vec![3, 1],
            rnn_layers: 1,
            rnn_units: 8,
            fc_layers: 1,
            fc_units: 8,
            fc_activation: Activation::Linear,
            maxout_pieces: 2,
            dropout: 0.25,
        }
    }
}

/// Splits `n` into `layers` pooling factors whose product is `n`, largest
/// primes placed first (40 over 2 layers gives [5, 8]).
fn factor_schedule(n: usize, layers: usize) -> Vec<usize> {
    let mut primes = Vec::new();
    let mut rest = n;
    let mut p = 2;
    while rest > 1 {
        while rest % p == 0 {
            primes.push(p);
            rest /= p;
        }
        p += 1;
    }
    primes.sort_unstable_by(|a, b| b.cmp(a));
    let mut slots = vec![1usize; layers];
    // Greedy: multiply each prime into the currently smallest slot.
    for q in primes {
        let i = (0..layers).min_by_key(|&i| (slots[i], i)).unwrap();
        slots[i] *= q;
    }
    slots
}

impl CbrnnConfig {
    /// Default pooling schedules for `n` convolution layers (1 to 4).
    pub fn with_cnn_layers(mut self, n: usize) -> Self {
        self.n_cnn_layers = n;
        if n == 2 && self.frames == 500 && self.mbe_bands == 40 {
            self.pool_time = vec![10, 10];
            self.pool_freq_mbe = vec![5, 8];
        } else {
            self.pool_time = factor_schedule(self.frames / 5, n);
            self.pool_freq_mbe = factor_schedule(self.mbe_bands, n);
        }
        self.pool_freq_domfreq = Self::domfreq_pools(self.domfreq_slots, n);
        self
    }

    /// Switches the dominant-frequency width (3 or 6 slots) and its pooling.
    pub fn with_domfreq_slots(mut self, slots: usize) -> Self {
        self.domfreq_slots = slots;
        self.pool_freq_domfreq = Self::domfreq_pools(slots, self.n_cnn_layers);
        self
    }

    fn domfreq_pools(slots: usize, layers: usize) -> Vec<usize> {
        let mut pools = vec![1; layers.max(1)];
        if slots % 3 == 0 && layers >= 2 {
            pools[0] = 3;
            pools[1] = slots / 3;
        } else {
            pools[0] = slots;
        }
        pools.truncate(layers);
        pools
    }

    /// Output length of the convolutional stage (5 for the default config).
    pub fn seq_len(&self) -> usize {
        self.frames / self.pool_time.iter().product::<usize>().max(1)
    }

    pub fn validate(&self) -> Result<()> {
        let layers = self.n_cnn_layers;
        if !(1..=4).contains(&layers) {
            return Err(Error::Config(format!("n_cnn_layers must be in 1..=4, got {layers}")));
        }
        for (name, v) in [
            ("pool_time", &self.pool_time),
            ("pool_freq_mbe", &self.pool_freq_mbe),
            ("pool_freq_domfreq", &self.pool_freq_domfreq),
        ] {
            if v.len() != layers {
                return Err(Error::Config(format!(
                    "{name} has {} factors for {layers} conv layers",
                    v.len()
                )));
            }
            if v.contains(&0) {
                return Err(Error::Config(format!("{name} contains a zero factor")));
            }
        }
        let pt: usize = self.pool_time.iter().product();
        if self.frames == 0 || self.frames % pt != 0 {
            return Err(Error::Config(format!(
                "time pooling product {pt} does not divide {} frames",
                self.frames
            )));
        }
        if self.features.uses_mbe() && self.pool_freq_mbe.iter().product::<usize>() != self.mbe_bands {
            return Err(Error::Config(format!(
                "mbe frequency pooling {:?} does not reduce {} bands to 1",
                self.pool_freq_mbe, self.mbe_bands
            )));
        }
        if self.features.uses_domfreq()
            && self.pool_freq_domfreq.iter().product::<usize>() != self.domfreq_slots
        {
            return Err(Error::Config(format!(
                "domfreq frequency pooling {:?} does not reduce {} slots to 1",
                self.pool_freq_domfreq, self.domfreq_slots
            )));
        }
        if self.receptive_field % 2 == 0 {
            return Err(Error::Config("receptive_field must be odd".into()));
        }
        for (name, v) in [
            ("n_filters", self.n_filters),
            ("rnn_layers", self.rnn_layers),
            ("rnn_units", self.rnn_units),
            ("fc_layers", self.fc_layers),
            ("fc_units", self.fc_units),
        ] {
            if v == 0 {
                return Err(Error::Config(format!("{name} must be positive")));
            }
        }
        if self.maxout_pieces < 2 {
            return Err(Error::Config("maxout_pieces must be >= 2".into()));
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return Err(Error::Config(format!("dropout {} outside [0, 1)", self.dropout)));
        }
        Ok(())
    }
}

pub mod evaluate;
pub mod extract;
pub mod grid;
pub mod predict;
pub mod split;
pub mod train;

use birdcall::eval::SplitSpec;
use clap::Args;

use crate::config::derive_seed;

/// Cross-validation protocol selection.
#[derive(Debug, Clone, Default, Args)]
pub struct ProtocolArgs {
    /// Five stratified folds of 60/20/20 with a held-out test part.
    #[arg(long, conflicts_with = "challenge_protocol")]
    pub dev_protocol: bool,
    /// Three stratified folds of 80/20 whose models are ensembled.
    #[arg(long)]
    pub challenge_protocol: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Protocol {
    Development,
    Challenge,
}

impl ProtocolArgs {
    pub fn protocol(&self, default: Protocol) -> Protocol {
        if self.dev_protocol {
            Protocol::Development
        } else if self.challenge_protocol {
            Protocol::Challenge
        } else {
            default
        }
    }
}

impl Protocol {
    pub fn spec(self, root_seed: u64) -> SplitSpec {
        let seed = derive_seed(root_seed, 0x5117);
        match self {
            Protocol::Development => SplitSpec::development(seed),
            Protocol::Challenge => SplitSpec::challenge(seed),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Protocol::Development => "development",
            Protocol::Challenge => "challenge",
        }
    }
}

//! Resolves a [`CorpusSelection`] into concrete named profiles.

use maxreg_core::{corpus_for_dim, NormSpec64, Profile1d, ProfileSpec64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::{CorpusSelection, ExperimentConfig};

pub type Member = (String, ProfileSpec64);

/// Profiles for `dim` under the config's selection. `default_ids` is the
/// experiment's own choice when the selection is [`CorpusSelection::Default`];
/// an empty slice means the whole built-in corpus.
pub fn resolve(cfg: &ExperimentConfig, dim: usize, default_ids: &[&str]) -> Vec<Member> {
    let builtin = corpus_for_dim::<f64>(dim);
    let pick = |ids: &[String]| -> Vec<Member> {
        ids.iter()
            .filter_map(|id| {
                cfg.profiles
                    .get(id)
                    .map(|s| (id.clone(), s.clone()))
                    .or_else(|| builtin.iter().find(|(b, _)| b == id).cloned())
            })
            .collect()
    };
    match &cfg.corpus {
        CorpusSelection::All => builtin,
        CorpusSelection::Ids(ids) => pick(ids),
        CorpusSelection::Random(n) => random_corpus(cfg.seed, *n, dim),
        CorpusSelection::Default if default_ids.is_empty() => builtin,
        CorpusSelection::Default => pick(&default_ids.iter().map(|s| s.to_string()).collect::<Vec<_>>()),
    }
}

/// `n` block-decreasing profiles with parameters drawn from a ChaCha8
/// stream seeded by `seed`. Identical arguments give identical output.
pub fn random_corpus(seed: u64, n: usize, dim: usize) -> Vec<Member> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|i| {
            let family = rng.random_range(0..6u32);
            let spec = match family {
                0 => ProfileSpec64::Square { side: rng.random_range(0.4..1.6) },
                1 => ProfileSpec64::QuasiBall {
                    p: rng.random_range(0.4..1.0),
                    radius: rng.random_range(0.5..1.4),
                },
                2 => ProfileSpec64::Radial {
                    norm: random_norm(&mut rng, dim),
                    profile: Profile1d::Exp { rate: rng.random_range(0.5..3.0) },
                },
                3 => ProfileSpec64::Radial {
                    norm: random_norm(&mut rng, dim),
                    profile: Profile1d::Tent { width: rng.random_range(0.5..1.8) },
                },
                4 => ProfileSpec64::Radial {
                    norm: random_norm(&mut rng, dim),
                    profile: Profile1d::Gaussian { sigma: rng.random_range(0.2..0.8) },
                },
                _ => ProfileSpec64::Radial {
                    norm: random_norm(&mut rng, dim),
                    profile: Profile1d::Step { radius: rng.random_range(0.3..1.4) },
                },
            };
            (format!("random-{i:03}"), spec)
        })
        .collect()
}

fn random_norm(rng: &mut ChaCha8Rng, dim: usize) -> NormSpec64 {
    match rng.random_range(0..5u32) {
        0 => NormSpec64::Linf,
        1 => NormSpec64::l1(),
        2 => NormSpec64::l2(),
        3 => NormSpec64::Lp { p: rng.random_range(1.2..4.0) },
        _ => NormSpec64::Rectangle { weights: (0..dim).map(|_| rng.random_range(0.5..2.0)).collect() },
    }
}

/// Profiles that take values in `{0, c}`; jump thresholds treat them differently.
pub fn is_indicator(spec: &ProfileSpec64) -> bool {
    matches!(
        spec,
        ProfileSpec64::Square { .. }
            | ProfileSpec64::QuasiBall { .. }
            | ProfileSpec64::Radial { profile: Profile1d::Step { .. }, .. }
    )
}

//! Synthetic behavior-log generator.
//!
//! Players are drawn from eight cells: the four play-style archetypes, each
//! as human or bot. Count features follow a Gamma-Poisson mixture (negative
//! binomial) so each cell controls mean and overdispersion separately;
//! success counts are binomial thinnings of their attempt counts, which
//! enforces the log invariants by construction. Humans wander with a
//! persistent random walk; bots repeat a fixed waypoint loop, so their
//! movement is regular rather than merely slower or faster.
//!
//! Every player's stream is a pure function of (config seed, player index),
//! so any player can be regenerated in isolation and generation order can
//! never change the output.

pub mod profiles;

pub use profiles::{
    ArchetypeProfile, CountModel, CountTable, MovementModel, ProfileError, ProfileSet,
    SessionModel, PROFILE_FORMAT_VERSION,
};

use std::f64::consts::{PI, TAU};

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution, Gamma, Normal, Poisson};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::logmodel::{BehaviorSample, Label, LabeledSample, Style};
use crate::seed::{derive_seed, seeded_rng};

/// Canonical cell order: humans Killer/Achiever/Explorer/Remainder, then
/// bots in the same style order. Player indices are assigned in this order.
pub const CELL_ORDER: [(Style, bool); 8] = [
    (Style::Killer, false),
    (Style::Achiever, false),
    (Style::Explorer, false),
    (Style::Remainder, false),
    (Style::Killer, true),
    (Style::Achiever, true),
    (Style::Explorer, true),
    (Style::Remainder, true),
];

/// Default population weights per cell, aligned with [`CELL_ORDER`]: the
/// observed player-type split of a large commercial MMORPG census. Untyped
/// "remainder" players dominate, explorers are rare (and bot explorers
/// nearly absent), and bots are roughly half the population overall.
pub const DEFAULT_MIX_WEIGHTS: [u64; 8] = [777, 1266, 224, 6186, 2296, 1895, 11, 4251];

/// Players requested for one (style, human/bot) cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CellCount {
    pub style: Style,
    pub is_bot: bool,
    pub count: u64,
}

/// Full generator configuration. Construct via [`default_mix`] or assemble
/// by hand for custom cell counts or profile overrides.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorConfig {
    pub seed: u64,
    /// Nominal gap between samples; timestamps advance by this much.
    pub interval_seconds: i64,
    pub cells: Vec<CellCount>,
    pub profiles: ProfileSet,
}

/// Default sampling interval: five minutes.
pub const DEFAULT_INTERVAL_SECONDS: i64 = 300;

#[derive(Debug, Error)]
pub enum GenError {
    #[error(transparent)]
    Profile(#[from] ProfileError),
    #[error("interval_seconds must be positive, got {0}")]
    BadInterval(i64),
    #[error("cell {style:?}/{kind} appears more than once in the config")]
    DuplicateCell { style: Style, kind: &'static str },
    #[error("config requests no {0} players; need at least one human and one bot")]
    MissingClass(&'static str),
}

/// Allocate `total_players` to the eight cells proportionally to
/// [`DEFAULT_MIX_WEIGHTS`] with largest-remainder rounding (ties favor the
/// earlier cell), and pair the allocation with the default profiles.
pub fn default_mix(total_players: u64, seed: u64) -> GeneratorConfig {
    let weight_sum: u128 = DEFAULT_MIX_WEIGHTS.iter().map(|&w| w as u128).sum();
    let mut counts = [0u64; 8];
    let mut remainders: Vec<(usize, u128)> = Vec::with_capacity(8);
    let mut allocated: u64 = 0;
    for (i, &w) in DEFAULT_MIX_WEIGHTS.iter().enumerate() {
        let numerator = total_players as u128 * w as u128;
        counts[i] = (numerator / weight_sum) as u64;
        remainders.push((i, numerator % weight_sum));
        allocated += counts[i];
    }
    // Hand out the leftovers by descending remainder; stable sort keeps the
    // earlier cell first on ties.
    remainders.sort_by_key(|&(_, rem)| std::cmp::Reverse(rem));
    for &(cell, _) in remainders.iter().take((total_players - allocated) as usize) {
        counts[cell] += 1;
    }

    GeneratorConfig {
        seed,
        interval_seconds: DEFAULT_INTERVAL_SECONDS,
        cells: CELL_ORDER
            .iter()
            .zip(counts)
            .map(|(&(style, is_bot), count)| CellCount { style, is_bot, count })
            .collect(),
        profiles: ProfileSet::defaults(),
    }
}

fn kind(is_bot: bool) -> &'static str {
    if is_bot { "bot" } else { "human" }
}

/// Negative-binomial draw as a Gamma-Poisson mixture; dispersion 0 is plain
/// Poisson.
fn nb_count(rng: &mut ChaCha8Rng, model: CountModel) -> u64 {
    let lambda = if model.dispersion == 0.0 {
        model.mean
    } else if model.mean == 0.0 {
        0.0
    } else {
        let shape = 1.0 / model.dispersion;
        let scale = model.dispersion * model.mean;
        Gamma::new(shape, scale).expect("validated parameters").sample(rng)
    };
    if lambda <= 0.0 {
        return 0;
    }
    Poisson::new(lambda).expect("positive finite rate").sample(rng) as u64
}

fn thin(rng: &mut ChaCha8Rng, attempts: u64, rate: f64) -> u64 {
    if attempts == 0 {
        return 0;
    }
    Binomial::new(attempts, rate).expect("validated rate").sample(rng)
}

/// Fold a coordinate into [lo, hi] by reflecting off the walls.
fn reflect(v: f64, lo: f64, hi: f64) -> f64 {
    let span = hi - lo;
    if span <= 0.0 {
        return lo;
    }
    let mut t = (v - lo).rem_euclid(2.0 * span);
    if t > span {
        t = 2.0 * span - t;
    }
    lo + t
}

enum Movement {
    Walk { x: f64, y: f64, heading: f64 },
    Loop { waypoints: Vec<(f64, f64)>, visited: usize },
}

/// Generate one player's full session. Pure in (profile, id, seed,
/// interval), independent of every other player.
pub fn generate_player(
    profile: &ArchetypeProfile,
    player_id: &str,
    seed: u64,
    interval_seconds: i64,
) -> Vec<LabeledSample> {
    let mut rng = seeded_rng(seed);
    let session =
        rng.random_range(profile.session.min_samples..=profile.session.max_samples) as usize;

    let mv = &profile.movement;
    let (lo_x, hi_x) = (mv.home_x - mv.roam_radius, mv.home_x + mv.roam_radius);
    let (lo_y, hi_y) = (mv.home_y - mv.roam_radius, mv.home_y + mv.roam_radius);
    let mut movement = if mv.waypoint_loop {
        let n_waypoints = rng.random_range(4..=6usize);
        let waypoints = (0..n_waypoints)
            .map(|_| (rng.random_range(lo_x..=hi_x), rng.random_range(lo_y..=hi_y)))
            .collect();
        Movement::Loop { waypoints, visited: 0 }
    } else {
        Movement::Walk {
            x: rng.random_range(lo_x..=hi_x),
            y: rng.random_range(lo_y..=hi_y),
            heading: rng.random_range(0.0..TAU),
        }
    };
    let turn = Normal::new(0.0, (1.0 - mv.heading_persistence) * PI)
        .expect("persistence below 1 keeps the deviation positive");
    let step = Gamma::new(2.0, mv.step_mean / 2.0).expect("validated step length");
    let jitter = Normal::new(0.0, mv.waypoint_jitter).expect("validated jitter");

    let mut out = Vec::with_capacity(session);
    for interval in 0..session {
        let (x, y) = match &mut movement {
            Movement::Loop { waypoints, visited } => {
                let (wx, wy) = waypoints[*visited % waypoints.len()];
                *visited += 1;
                (wx + jitter.sample(&mut rng), wy + jitter.sample(&mut rng))
            }
            Movement::Walk { x, y, heading } => {
                if interval > 0 {
                    *heading += turn.sample(&mut rng);
                    let len = step.sample(&mut rng);
                    *x = reflect(*x + len * heading.cos(), lo_x, hi_x);
                    *y = reflect(*y + len * heading.sin(), lo_y, hi_y);
                }
                (*x, *y)
            }
        };

        let c = &profile.counts;
        let hunting = nb_count(&mut rng, c.hunting);
        let attack = nb_count(&mut rng, c.attack);
        let hit = thin(&mut rng, attack, profile.hit_rate);
        let defense = nb_count(&mut rng, c.defense);
        let avoidance = thin(&mut rng, defense, profile.avoidance_rate);
        let sample = BehaviorSample {
            player_id: player_id.to_string(),
            timestamp: interval as i64 * interval_seconds,
            hunting,
            attack,
            hit,
            defense,
            avoidance,
            recovery: nb_count(&mut rng, c.recovery),
            item: nb_count(&mut rng, c.item),
            collection: nb_count(&mut rng, c.collection),
            drop: nb_count(&mut rng, c.drop),
            x,
            y,
            portal: nb_count(&mut rng, c.portal),
        };
        out.push(LabeledSample {
            sample,
            label: Some(if profile.is_bot { Label::Bot } else { Label::Human }),
            style: Some(profile.style),
        });
    }
    out
}

/// Generate the whole population: cells in canonical order, players within
/// a cell consecutive, samples per player in timestamp order. Player ids
/// are `p{index:06}` over a global index.
pub fn generate(cfg: &GeneratorConfig) -> Result<Vec<LabeledSample>, GenError> {
    cfg.profiles.validate()?;
    if cfg.interval_seconds <= 0 {
        return Err(GenError::BadInterval(cfg.interval_seconds));
    }
    let mut counts = [0u64; 8];
    let mut seen = [false; 8];
    for cell in &cfg.cells {
        let slot = CELL_ORDER
            .iter()
            .position(|&(s, b)| s == cell.style && b == cell.is_bot)
            .expect("CELL_ORDER covers every (style, bot) pair");
        if seen[slot] {
            return Err(GenError::DuplicateCell { style: cell.style, kind: kind(cell.is_bot) });
        }
        seen[slot] = true;
        counts[slot] = cell.count;
    }
    let humans: u64 = counts[..4].iter().sum();
    let bots: u64 = counts[4..].iter().sum();
    if humans == 0 {
        return Err(GenError::MissingClass("human"));
    }
    if bots == 0 {
        return Err(GenError::MissingClass("bot"));
    }

    let mut jobs = Vec::new();
    let mut player_index: u64 = 0;
    for (slot, &(style, is_bot)) in CELL_ORDER.iter().enumerate() {
        let profile = cfg.profiles.profile(style, is_bot);
        for _ in 0..counts[slot] {
            jobs.push((player_index, profile));
            player_index += 1;
        }
    }
    // Each stream depends only on its derived seed, so players generate in
    // parallel; collecting by job index keeps the output order fixed.
    let streams: Vec<Vec<LabeledSample>> = jobs
        .par_iter()
        .map(|&(index, profile)| {
            let player_id = format!("p{index:06}");
            generate_player(profile, &player_id, derive_seed(cfg.seed, &[index]), cfg.interval_seconds)
        })
        .collect();
    Ok(streams.into_iter().flatten().collect())
}

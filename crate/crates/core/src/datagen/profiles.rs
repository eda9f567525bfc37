//! Archetype profiles: the distributional parameters behind the generator.
//!
//! Eight profiles cover the (style, human/bot) cells. Counts come from a
//! negative-binomial model per feature (mean plus a dispersion knob), success
//! counts from binomial thinning, and positions from one of two movement
//! models. The defaults are shipped as an embedded, versioned JSON document
//! and can be replaced wholesale by a user-supplied file.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::logmodel::Style;

/// Version expected in a profile document.
pub const PROFILE_FORMAT_VERSION: &str = "1";

/// Negative-binomial parameters for one count feature.
///
/// `dispersion` is the overdispersion knob: variance = mean * (1 +
/// dispersion * mean), so 0 degenerates to Poisson. Bots get lower
/// dispersion than their human counterpart; automated play is regular.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CountModel {
    pub mean: f64,
    pub dispersion: f64,
}

/// The eight independently drawn count features. `hit` and `avoidance` are
/// thinned from `attack` and `defense` instead, and positions come from the
/// movement model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CountTable {
    pub hunting: CountModel,
    pub attack: CountModel,
    pub defense: CountModel,
    pub recovery: CountModel,
    pub item: CountModel,
    pub collection: CountModel,
    pub drop: CountModel,
    pub portal: CountModel,
}

impl CountTable {
    pub(crate) const FEATURES: [&'static str; 8] =
        ["hunting", "attack", "defense", "recovery", "item", "collection", "drop", "portal"];

    pub(crate) fn get(&self, feature: &str) -> CountModel {
        match feature {
            "hunting" => self.hunting,
            "attack" => self.attack,
            "defense" => self.defense,
            "recovery" => self.recovery,
            "item" => self.item,
            "collection" => self.collection,
            "drop" => self.drop,
            "portal" => self.portal,
            other => unreachable!("unknown count feature {other}"),
        }
    }
}

/// Where and how a player moves.
///
/// Humans follow a persistent random walk with Gamma(shape 2) step lengths,
/// reflected into the square `home ± roam_radius`. Bots visit a fixed loop
/// of 4 to 6 waypoints drawn inside that square, with per-visit jitter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MovementModel {
    pub home_x: f64,
    pub home_y: f64,
    pub roam_radius: f64,
    /// Mean step length per interval (walk mode only).
    pub step_mean: f64,
    /// Heading carry-over in [0, 1): higher values turn less per interval.
    pub heading_persistence: f64,
    pub waypoint_loop: bool,
    /// Standard deviation of per-visit waypoint noise (loop mode only).
    pub waypoint_jitter: f64,
}

/// Number of 5-minute samples in one player's session, uniform inclusive.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SessionModel {
    pub min_samples: u64,
    pub max_samples: u64,
}

/// Complete generative description of one (style, human/bot) cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArchetypeProfile {
    pub style: Style,
    pub is_bot: bool,
    pub counts: CountTable,
    /// P(an attack lands); `hit ~ Binomial(attack, hit_rate)`.
    pub hit_rate: f64,
    /// P(a defense succeeds); `avoidance ~ Binomial(defense, avoidance_rate)`.
    pub avoidance_rate: f64,
    pub movement: MovementModel,
    pub session: SessionModel,
}

/// A validated, versioned set of all eight cell profiles.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileSet {
    pub version: String,
    pub profiles: Vec<ArchetypeProfile>,
}

#[derive(Debug, Error)]
pub enum ProfileError {
    #[error("profile json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unsupported profile version '{found}', expected '{expected}'")]
    Version { found: String, expected: &'static str },
    #[error("profile set must cover each (style, bot) cell exactly once; {0}")]
    Coverage(String),
    #[error("profile {style:?}/{kind}: {problem}")]
    Parameter { style: Style, kind: &'static str, problem: String },
    #[error(
        "bot {style:?} has dispersion {bot} > human {human} for '{feature}'; \
         bots must be at most as dispersed as their human counterpart"
    )]
    BotDispersion { style: Style, feature: &'static str, bot: f64, human: f64 },
}

fn kind(is_bot: bool) -> &'static str {
    if is_bot { "bot" } else { "human" }
}

impl ArchetypeProfile {
    fn validate(&self) -> Result<(), ProfileError> {
        let err = |problem: String| ProfileError::Parameter {
            style: self.style,
            kind: kind(self.is_bot),
            problem,
        };
        for feature in CountTable::FEATURES {
            let m = self.counts.get(feature);
            if !(m.mean.is_finite() && m.mean >= 0.0) {
                return Err(err(format!("'{feature}' mean {} must be finite and >= 0", m.mean)));
            }
            if !(m.dispersion.is_finite() && m.dispersion >= 0.0) {
                return Err(err(format!(
                    "'{feature}' dispersion {} must be finite and >= 0",
                    m.dispersion
                )));
            }
        }
        for (name, rate) in [("hit_rate", self.hit_rate), ("avoidance_rate", self.avoidance_rate)]
        {
            if !(rate.is_finite() && (0.0..=1.0).contains(&rate)) {
                return Err(err(format!("{name} {rate} must lie in [0, 1]")));
            }
        }
        let mv = &self.movement;
        if !(mv.home_x.is_finite() && mv.home_y.is_finite()) {
            return Err(err("home position must be finite".into()));
        }
        if !(mv.roam_radius.is_finite() && mv.roam_radius > 0.0) {
            return Err(err(format!("roam_radius {} must be positive", mv.roam_radius)));
        }
        if !(mv.step_mean.is_finite() && mv.step_mean > 0.0) {
            return Err(err(format!("step_mean {} must be positive", mv.step_mean)));
        }
        if !(mv.heading_persistence.is_finite() && (0.0..1.0).contains(&mv.heading_persistence)) {
            return Err(err(format!(
                "heading_persistence {} must lie in [0, 1)",
                mv.heading_persistence
            )));
        }
        if !(mv.waypoint_jitter.is_finite() && mv.waypoint_jitter >= 0.0) {
            return Err(err(format!("waypoint_jitter {} must be >= 0", mv.waypoint_jitter)));
        }
        if self.session.min_samples == 0 || self.session.min_samples > self.session.max_samples {
            return Err(err(format!(
                "session range [{}, {}] must satisfy 1 <= min <= max",
                self.session.min_samples, self.session.max_samples
            )));
        }
        Ok(())
    }
}

impl ProfileSet {
    /// Parse and validate a profile document.
    pub fn from_json(text: &str) -> Result<ProfileSet, ProfileError> {
        let set: ProfileSet = serde_json::from_str(text)?;
        set.validate()?;
        Ok(set)
    }

    /// The embedded default profiles.
    pub fn defaults() -> ProfileSet {
        ProfileSet::from_json(include_str!("default_profiles.json"))
            .expect("embedded default profiles are valid")
    }

    pub fn validate(&self) -> Result<(), ProfileError> {
        if self.version != PROFILE_FORMAT_VERSION {
            return Err(ProfileError::Version {
                found: self.version.clone(),
                expected: PROFILE_FORMAT_VERSION,
            });
        }
        for style in Style::ALL {
            for is_bot in [false, true] {
                let n = self
                    .profiles
                    .iter()
                    .filter(|p| p.style == style && p.is_bot == is_bot)
                    .count();
                if n != 1 {
                    return Err(ProfileError::Coverage(format!(
                        "found {n} profiles for {style:?}/{}",
                        kind(is_bot)
                    )));
                }
            }
        }
        for p in &self.profiles {
            p.validate()?;
        }
        // Bots are automated: per style and count feature, at most the
        // human counterpart's dispersion.
        for style in Style::ALL {
            let human = self.profile(style, false);
            let bot = self.profile(style, true);
            for feature in CountTable::FEATURES {
                let (h, b) = (human.counts.get(feature), bot.counts.get(feature));
                if b.dispersion > h.dispersion {
                    return Err(ProfileError::BotDispersion {
                        style,
                        feature,
                        bot: b.dispersion,
                        human: h.dispersion,
                    });
                }
            }
        }
        Ok(())
    }

    /// The unique profile of one cell. Panics if called on an unvalidated
    /// set with missing cells.
    pub fn profile(&self, style: Style, is_bot: bool) -> &ArchetypeProfile {
        self.profiles
            .iter()
            .find(|p| p.style == style && p.is_bot == is_bot)
            .expect("validated profile sets cover every cell")
    }
}

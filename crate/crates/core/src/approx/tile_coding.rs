use crate::env::{MountainCarState, POSITION_RANGE, VELOCITY_RANGE};
use crate::error::{Error, Result};

/// Grid tile coder with explicit (unhashed) indexing.
///
/// Each tiling lays a `(tiles_per_dimension + 1)^dims` grid over the
/// normalised input space; the extra tile per dimension absorbs the offset
/// overhang. Tiling `i` is shifted in dimension `d` by
/// `(i * displacement[d] mod tilings) / tilings` tile widths.
#[derive(Clone, Debug, PartialEq)]
pub struct TileCoderConfig {
    pub tilings: usize,
    pub tiles_per_dimension: usize,
    pub displacement: Vec<usize>,
    pub ranges: Vec<(f64, f64)>,
}

impl TileCoderConfig {
    /// 16 tilings, 8 tiles per dimension, displacement (1, 3) over mountain
    /// car position and velocity.
    pub fn mountain_car() -> Self {
        Self {
            tilings: 16,
            tiles_per_dimension: 8,
            displacement: vec![1, 3],
            ranges: vec![POSITION_RANGE, VELOCITY_RANGE],
        }
    }
}

#[derive(Clone, Debug)]
pub struct TileCoder {
    config: TileCoderConfig,
    tiles_per_tiling: usize,
}

impl TileCoder {
    pub fn new(config: TileCoderConfig) -> Result<Self> {
        let dims = config.ranges.len();
        if config.tilings == 0 || config.tiles_per_dimension == 0 || dims == 0 {
            return Err(Error::Config(
                "tile coder needs tilings, tiles and dimensions".into(),
            ));
        }
        if config.displacement.len() != dims {
            return Err(Error::Config(format!(
                "{} displacement entries for {dims} dimensions",
                config.displacement.len()
            )));
        }
        if config.ranges.iter().any(|(lo, hi)| !(hi > lo)) {
            return Err(Error::Config("tile coder ranges must be increasing".into()));
        }
        let tiles_per_tiling = (config.tiles_per_dimension + 1).pow(dims as u32);
        Ok(Self {
            config,
            tiles_per_tiling,
        })
    }

    pub fn config(&self) -> &TileCoderConfig {
        &self.config
    }

    pub fn tilings(&self) -> usize {
        self.config.tilings
    }

    /// Features per action.
    pub fn feature_count(&self) -> usize {
        self.config.tilings * self.tiles_per_tiling
    }

    /// Appends one active feature index per tiling to `out`. Inputs outside
    /// the configured ranges are clipped.
    pub fn active_tiles_into(&self, observation: &[f64], out: &mut Vec<usize>) {
        let cfg = &self.config;
        debug_assert_eq!(observation.len(), cfg.ranges.len());
        let side = cfg.tiles_per_dimension + 1;
        let scaled: Vec<f64> = observation
            .iter()
            .zip(&cfg.ranges)
            .map(|(&x, &(lo, hi))| {
                (x.clamp(lo, hi) - lo) / (hi - lo) * cfg.tiles_per_dimension as f64
            })
            .collect();
        for tiling in 0..cfg.tilings {
            let mut index = 0;
            for (d, &u) in scaled.iter().enumerate() {
                let offset =
                    ((tiling * cfg.displacement[d]) % cfg.tilings) as f64 / cfg.tilings as f64;
                let coord = ((u + offset).floor() as usize).min(side - 1);
                index = index * side + coord;
            }
            out.push(tiling * self.tiles_per_tiling + index);
        }
    }

    pub fn active_tiles(&self, observation: &[f64]) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.config.tilings);
        self.active_tiles_into(observation, &mut out);
        out
    }

    pub fn active_tiles_for(&self, state: &MountainCarState) -> Vec<usize> {
        self.active_tiles(&state.observation())
    }
}

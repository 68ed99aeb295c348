//! Timing of `safe_controls` on pre-composed fields of varying object count.
//!
//! Fields are built first (one random ROI per object, composed with
//! `compose_many`); only the control computation is timed. Repetitions are
//! interleaved across object counts so that drift in machine load affects
//! every count alike.

use std::hint::black_box;
use std::time::{Duration, Instant};

use ispnav_core::control::safe_controls;
use ispnav_core::{CameraIntrinsics, ControllerParams, IspField, PotentialTuple, RegionOfInterest};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const HEADER: &str = "N,median_ns,field_bytes";

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub objects: usize,
    pub median_ns: u64,
    pub field_bytes: usize,
    /// Time spent building the field. Not part of the control cost.
    pub compose: Duration,
}

impl BenchRow {
    pub fn csv(&self) -> String {
        format!("{},{},{}", self.objects, self.median_ns, self.field_bytes)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchConfig {
    pub width: usize,
    pub height: usize,
    pub object_counts: Vec<usize>,
    pub repetitions: usize,
    pub seed: u64,
}

/// A field holding `n` random objects, composed one object field at a time.
pub fn random_field(width: usize, height: usize, n: usize, rng: &mut ChaCha8Rng) -> ispnav_core::Result<IspField> {
    let (w, h) = (width as i64, height as i64);
    let objects = (0..n).map(|_| {
        let x0 = rng.random_range(0..w);
        let y0 = rng.random_range(0..h);
        let x1 = (x0 + rng.random_range(0..w / 4 + 1)).min(w - 1);
        let y1 = (y0 + rng.random_range(0..h / 4 + 1)).min(h - 1);
        let tau = rng.random_range(0.1..10.0);
        let tau_dot = rng.random_range(-2.0..1.0);
        let mut f = IspField::new(width, height).expect("non-empty dimensions");
        f.write_roi(
            RegionOfInterest::new(x0, y0, x1, y1),
            PotentialTuple::new(tau, tau_dot).expect("finite, non-negative tau"),
        );
        f
    });
    IspField::compose_many(width, height, objects)
}

pub fn run_bench(cfg: &BenchConfig) -> anyhow::Result<Vec<BenchRow>> {
    anyhow::ensure!(!cfg.object_counts.is_empty(), "object counts must not be empty");
    anyhow::ensure!(cfg.repetitions > 0, "repetitions must be positive");
    anyhow::ensure!(cfg.width > 0 && cfg.height > 0, "field dimensions must be positive");
    let intrinsics = CameraIntrinsics::centered(cfg.width as f64 / 2.0, cfg.width, cfg.height)?;
    let params = ControllerParams::default();
    params.validate(cfg.width)?;

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut fields = Vec::with_capacity(cfg.object_counts.len());
    let mut compose = Vec::with_capacity(cfg.object_counts.len());
    for &n in &cfg.object_counts {
        let start = Instant::now();
        fields.push(random_field(cfg.width, cfg.height, n, &mut rng)?);
        compose.push(start.elapsed());
    }

    // Warm caches and the allocator before measuring.
    for f in &fields {
        black_box(safe_controls(black_box(f), &intrinsics, &params)?);
    }
    let mut samples = vec![Vec::with_capacity(cfg.repetitions); fields.len()];
    for _ in 0..cfg.repetitions {
        for (f, s) in fields.iter().zip(samples.iter_mut()) {
            let start = Instant::now();
            black_box(safe_controls(black_box(f), &intrinsics, &params)?);
            s.push(start.elapsed().as_nanos() as u64);
        }
    }

    Ok(cfg
        .object_counts
        .iter()
        .zip(fields.iter().zip(samples.iter_mut()))
        .zip(compose)
        .map(|((&objects, (f, s)), compose)| BenchRow {
            objects,
            median_ns: median(s),
            field_bytes: f.byte_size(),
            compose,
        })
        .collect())
}

fn median(v: &mut [u64]) -> u64 {
    v.sort_unstable();
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        (v[m - 1] + v[m]) / 2
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn medians() {
        assert_eq!(median(&mut [5, 1, 3]), 3);
        assert_eq!(median(&mut [4, 1, 3, 2]), 2);
    }

    #[test]
    fn rows_per_count() {
        let rows = run_bench(&BenchConfig {
            width: 64,
            height: 48,
            object_counts: vec![0, 3, 30],
            repetitions: 3,
            seed: 9,
        })
        .unwrap();
        assert_eq!(rows.iter().map(|r| r.objects).collect::<Vec<_>>(), [0, 3, 30]);
        assert!(rows.iter().all(|r| r.field_bytes == rows[0].field_bytes));
        assert!(rows[0].csv().starts_with("0,"));
    }

    #[test]
    fn random_fields_are_seeded() {
        let a = random_field(32, 24, 5, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        let b = random_field(32, 24, 5, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        assert_eq!(a, b);
        assert!(!a.is_background());
    }
}

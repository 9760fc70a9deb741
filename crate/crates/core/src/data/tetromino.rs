//! 3×3 "T" versus "L" images.
//!
//! Every placement of a 4-pixel T (4 rotations) and a 4-pixel L (4 rotations,
//! both chiralities) inside the 3×3 frame, plus the negative of each image:
//! 8 T + 16 L placements, 48 noiseless images in total.

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Dataset, DatasetMeta, Split};
use crate::classify::Class;
use crate::error::Result;

/// Half-width of the uniform pixel noise on training images.
pub const TETROMINO_NOISE_BOUND: f64 = 0.1;

type Cells = Vec<(i32, i32)>;

const T_SHAPE: [(i32, i32); 4] = [(0, 0), (0, 1), (0, 2), (1, 1)];
const L_SHAPE: [(i32, i32); 4] = [(0, 0), (1, 0), (2, 0), (2, 1)];

fn rotate(cells: &Cells) -> Cells {
    cells.iter().map(|&(r, c)| (c, -r)).collect()
}

fn mirror(cells: &Cells) -> Cells {
    cells.iter().map(|&(r, c)| (r, -c)).collect()
}

/// All 3×3 bitmaps reachable by rotating (and optionally mirroring) then translating.
fn placements(shape: &[(i32, i32)], chiral: bool) -> BTreeSet<[u8; 9]> {
    let mut orientations = vec![shape.to_vec()];
    if chiral {
        orientations.push(mirror(&orientations[0]));
    }
    let mut out = BTreeSet::new();
    for base in orientations {
        let mut cells = base;
        for _ in 0..4 {
            cells = rotate(&cells);
            let r0 = cells.iter().map(|c| c.0).min().unwrap();
            let c0 = cells.iter().map(|c| c.1).min().unwrap();
            let norm: Cells = cells.iter().map(|&(r, c)| (r - r0, c - c0)).collect();
            let h = norm.iter().map(|c| c.0).max().unwrap();
            let w = norm.iter().map(|c| c.1).max().unwrap();
            for dr in 0..3 - h {
                for dc in 0..3 - w {
                    let mut img = [0u8; 9];
                    for &(r, c) in &norm {
                        img[((r + dr) * 3 + c + dc) as usize] = 1;
                    }
                    out.insert(img);
                }
            }
        }
    }
    out
}

/// The noiseless enumeration: images with pixels in {0, 1} and their class.
pub fn tetromino_patterns() -> Vec<([u8; 9], Class)> {
    let mut out = Vec::new();
    for (shape, chiral, class) in [(&T_SHAPE, false, Class::One), (&L_SHAPE, true, Class::Two)] {
        for img in placements(shape, chiral) {
            out.push((img, class));
            out.push((img.map(|p| 1 - p), class));
        }
    }
    out
}

/// `n_train` noisy draws (with replacement) form the training split; the full
/// noiseless enumeration forms the test split. Pixels are left unnormalized.
pub fn gen_tetromino(n_train: usize, seed: u64) -> Result<Dataset> {
    let patterns = tetromino_patterns();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut features = Vec::with_capacity(n_train + patterns.len());
    let mut labels = Vec::with_capacity(n_train + patterns.len());
    let mut split = Vec::with_capacity(n_train + patterns.len());
    for _ in 0..n_train {
        let (img, class) = patterns[rng.random_range(0..patterns.len())];
        features.push(
            img.iter()
                .map(|&p| p as f64 + rng.random_range(-TETROMINO_NOISE_BOUND..=TETROMINO_NOISE_BOUND))
                .collect(),
        );
        labels.push(class);
        split.push(Split::Train);
    }
    for (img, class) in &patterns {
        features.push(img.iter().map(|&p| p as f64).collect());
        labels.push(*class);
        split.push(Split::Test);
    }
    let meta = DatasetMeta::new("tetromino", Some(seed))
        .param("n_train", n_train)
        .param("n_test", patterns.len())
        .param("noise_bound", TETROMINO_NOISE_BOUND);
    Dataset::new(features, labels, split, meta)
}

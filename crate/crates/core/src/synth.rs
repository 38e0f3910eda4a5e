//! Synthetic texture datasets for tests, benchmarks, and demos.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::eval::Dataset;
use crate::gray::GrayImage;

const STREAM_SYNTH: u64 = 4 << 32;

fn stream_rng(seed: u64, stream: u64) -> rand_chacha::ChaCha8Rng {
    use rand_chacha::rand_core::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

const IMAGE_SIZE: usize = 64;
const FRAME: usize = 4;
const CELL: usize = 7;
const GRID: usize = 8; // 8x8 cells of 7px inside a 4px frame
const MID: f64 = 128.0;
const DARK: f64 = 64.0;
const BRIGHT: f64 = 192.0;

/// Renders a cell-type map into an image: a constant frame, per-cell
/// constant 1-pixel rings, and dark/bright 5x5 interiors.
///
/// Every pixel's radius-1 neighborhood stays inside its own cell (plus
/// constant frame/ring material), so the multiset of cell types alone fixes
/// the first-order code histogram regardless of arrangement.
fn render(cells: &[bool]) -> GrayImage<f64> {
    GrayImage::from_fn(IMAGE_SIZE, IMAGE_SIZE, |x, y| {
        if x < FRAME || y < FRAME || x >= FRAME + GRID * CELL || y >= FRAME + GRID * CELL {
            return MID;
        }
        let cx = (x - FRAME) / CELL;
        let cy = (y - FRAME) / CELL;
        let ox = (x - FRAME) % CELL;
        let oy = (y - FRAME) % CELL;
        if ox == 0 || oy == 0 || ox == CELL - 1 || oy == CELL - 1 {
            return MID;
        }
        if cells[cy * GRID + cx] {
            DARK
        } else {
            BRIGHT
        }
    })
}

/// Coarse arrangement: two of the four 4x4-cell quadrants are dark.
fn coarse_cells(rng: &mut impl Rng) -> Vec<bool> {
    let mut quadrants = [false; 4];
    let first = rng.gen_range(0..4);
    let mut second = rng.gen_range(0..3);
    if second >= first {
        second += 1;
    }
    quadrants[first] = true;
    quadrants[second] = true;
    let mut cells = vec![false; GRID * GRID];
    for (i, cell) in cells.iter_mut().enumerate() {
        let qx = (i % GRID) / (GRID / 2);
        let qy = (i / GRID) / (GRID / 2);
        *cell = quadrants[qy * 2 + qx];
    }
    cells
}

/// Fine arrangement: a balanced random scatter of dark cells.
fn fine_cells(rng: &mut impl Rng) -> Vec<bool> {
    let mut cells: Vec<bool> = (0..GRID * GRID).map(|i| i < GRID * GRID / 2).collect();
    cells.shuffle(rng);
    cells
}

/// A two-class "texture of textures" set: both classes place the same
/// balanced mix of dark and bright micro-cells, differing only in the
/// spatial arrangement (coarse quadrant blocks vs. fine scatter).
///
/// By construction every image of either class has the identical first-order
/// LBP histogram (radius 1), so shallow features carry no class signal while
/// the cell arrangement remains visible to deeper layers.
pub fn texture_of_textures(images_per_class: usize, seed: u64) -> Dataset {
    let mut samples = Vec::with_capacity(images_per_class * 2);
    let mut rng = stream_rng(seed, STREAM_SYNTH);
    for _ in 0..images_per_class {
        samples.push((render(&coarse_cells(&mut rng)), 0));
    }
    for _ in 0..images_per_class {
        samples.push((render(&fine_cells(&mut rng)), 1));
    }
    Dataset::new(samples, vec!["coarse".into(), "fine".into()]).expect("valid labels")
}

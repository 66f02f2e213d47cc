//! Counter-based seed derivation.
//!
//! Each channel cell `(master_seed, Nt, Nr, snr)` gets its own ChaCha8 key;
//! trial `i` of that cell reads ChaCha stream `i`. Detector, ρ and LAS settings
//! are deliberately not part of the key, so every detector variant at a cell
//! sees the same channel realizations.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// 256-bit key for one channel cell.
pub fn cell_key(master_seed: u64, nt: usize, nr: usize, snr_db: f64) -> [u8; 32] {
    let mut state = master_seed;
    for word in [nt as u64, nr as u64, snr_db.to_bits()] {
        state ^= splitmix64(&mut state.clone()).rotate_left(17) ^ word;
        splitmix64(&mut state);
    }
    let mut key = [0u8; 32];
    for chunk in key.chunks_exact_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
    }
    key
}

pub fn trial_rng(key: [u8; 32], trial_index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(trial_index);
    rng
}

//! Stable SHA-256 fingerprints over the exact bit patterns of model data.

use sha2::{Digest, Sha256};

use crate::bath::NoiseDecomposition;
use crate::system::{CMatrix, SystemModel};

pub type Fingerprint = [u8; 32];

pub fn to_hex(f: &Fingerprint) -> String {
    f.iter().map(|b| format!("{b:02x}")).collect()
}

fn feed_matrix(h: &mut Sha256, m: &CMatrix) {
    h.update((m.nrows() as u64).to_le_bytes());
    h.update((m.ncols() as u64).to_le_bytes());
    for r in 0..m.nrows() {
        for c in 0..m.ncols() {
            h.update(m[(r, c)].re.to_bits().to_le_bytes());
            h.update(m[(r, c)].im.to_bits().to_le_bytes());
        }
    }
}

pub fn model_fingerprint(model: &SystemModel) -> Fingerprint {
    let mut h = Sha256::new();
    h.update(b"system-model/v1");
    feed_matrix(&mut h, model.h_static());
    match model.drive() {
        None => h.update([0u8]),
        Some(d) => {
            h.update([1u8]);
            h.update(d.amplitude.to_bits().to_le_bytes());
            h.update(d.frequency.to_bits().to_le_bytes());
            feed_matrix(&mut h, &d.pattern);
        }
    }
    h.update((model.n_baths() as u64).to_le_bytes());
    for v in model.couplings() {
        feed_matrix(&mut h, v);
    }
    h.finalize().into()
}

pub fn decomposition_fingerprint(decompositions: &[NoiseDecomposition]) -> Fingerprint {
    let mut h = Sha256::new();
    h.update(b"noise-decomposition/v1");
    h.update((decompositions.len() as u64).to_le_bytes());
    for d in decompositions {
        h.update((d.terms().len() as u64).to_le_bytes());
        for t in d.terms() {
            for x in [t.c_real, t.c_imag, t.rate] {
                h.update(x.to_bits().to_le_bytes());
            }
        }
        h.update(d.delta_weight().to_bits().to_le_bytes());
        h.update(d.c_imag_at_zero().to_bits().to_le_bytes());
    }
    h.finalize().into()
}

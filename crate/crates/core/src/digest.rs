use sha2::{Digest, Sha256};

/// Lowercase hex SHA-256 of `bytes`.
pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Stable short identifier for a focal function, used in target and file names.
pub fn focal_hash(qualified_name: &str) -> String {
    sha256_hex(qualified_name.as_bytes())[..12].to_string()
}

/// Incremental hasher over length-prefixed fields so that field boundaries
/// cannot be shifted to produce the same digest.
#[derive(Default)]
pub struct FieldHasher {
    inner: Sha256,
}

impl FieldHasher {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn field(&mut self, bytes: &[u8]) -> &mut Self {
        self.inner.update((bytes.len() as u64).to_le_bytes());
        self.inner.update(bytes);
        self
    }

    pub fn finish(self) -> String {
        hex::encode(self.inner.finalize())
    }
}

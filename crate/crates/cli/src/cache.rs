//! On-disk memo of exact laws under `$POTTS_CACHE_DIR`, keyed by a SHA-256 of `(p, q, β, h, N)`.

use std::path::PathBuf;

use potts_core::model::{exact_magnetization_law_with_cap, MagnetizationLaw};
use potts_core::ModelParams;
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};

pub const CACHE_ENV: &str = "POTTS_CACHE_DIR";

pub fn cache_key(params: &ModelParams, n: u32) -> String {
    let mut hasher = Sha256::new();
    hasher.update(params.p.to_le_bytes());
    hasher.update(params.q.to_le_bytes());
    hasher.update(params.beta.to_bits().to_le_bytes());
    hasher.update(params.h.to_bits().to_le_bytes());
    hasher.update(n.to_le_bytes());
    hex::encode(hasher.finalize())
}

fn cache_dir() -> Option<PathBuf> {
    std::env::var_os(CACHE_ENV)
        .filter(|v| !v.is_empty())
        .map(PathBuf::from)
}

/// Exact law, read from the cache when present and written to it after computing.
pub fn exact_law_cached(params: &ModelParams, n: u32, cap: u128) -> CliResult<MagnetizationLaw> {
    let Some(dir) = cache_dir() else {
        return Ok(exact_magnetization_law_with_cap(params, n, cap)?);
    };
    let path = dir.join(format!("{}.json", cache_key(params, n)));
    if let Ok(text) = std::fs::read_to_string(&path) {
        // a corrupt entry is recomputed and overwritten
        if let Ok(law) = MagnetizationLaw::from_json(&text) {
            if law.params() == params && law.n() == n {
                return Ok(law);
            }
        }
    }
    let law = exact_magnetization_law_with_cap(params, n, cap)?;
    std::fs::create_dir_all(&dir).map_err(|e| CliError::io(dir.display().to_string(), e))?;
    let tmp = path.with_extension("json.tmp");
    std::fs::write(&tmp, law.to_json()?).map_err(|e| CliError::io(tmp.display().to_string(), e))?;
    std::fs::rename(&tmp, &path).map_err(|e| CliError::io(path.display().to_string(), e))?;
    Ok(law)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn keys_separate_parameters() {
        let a = ModelParams::new(2, 3, 0.5, 0.0).unwrap();
        assert_eq!(cache_key(&a, 10), cache_key(&a, 10));
        assert_ne!(cache_key(&a, 10), cache_key(&a, 11));
        assert_ne!(
            cache_key(&a, 10),
            cache_key(&a.with_beta(0.5000000000000001), 10)
        );
        assert_eq!(cache_key(&a, 10).len(), 64);
    }
}

use super::EmbeddingProvider;
use crate::error::Result;

/// Offline provider: signed feature hashing of token unigrams and bigrams.
///
/// Tokens are maximal runs of alphanumeric characters, lowercased. The
/// `[SEP]` marker is not a token and breaks the bigram chain. Texts with no
/// features (or whose features cancel) embed to the first basis vector.
#[derive(Debug, Clone)]
pub struct HashProvider {
    dim: usize,
    seed: u64,
    name: String,
}

impl HashProvider {
    pub fn new(dim: usize, seed: u64) -> Self {
        assert!(dim >= 2, "hash provider needs at least 2 dimensions");
        HashProvider {
            dim,
            seed,
            name: "hash".to_string(),
        }
    }

    fn bucket(&self, feature: &str) -> (usize, f64) {
        let h = mix(fnv1a(feature.as_bytes()) ^ mix(self.seed));
        let sign = if h >> 63 == 0 { 1.0 } else { -1.0 };
        ((h % self.dim as u64) as usize, sign)
    }

    pub fn embed_one(&self, text: &str) -> Vec<f64> {
        let mut v = vec![0.0; self.dim];
        for segment in text.split("[SEP]") {
            let tokens: Vec<String> = segment
                .split(|c: char| !c.is_alphanumeric())
                .filter(|t| !t.is_empty())
                .map(str::to_lowercase)
                .collect();
            for t in &tokens {
                let (i, s) = self.bucket(t);
                v[i] += s;
            }
            for pair in tokens.windows(2) {
                let (i, s) = self.bucket(&format!("{} {}", pair[0], pair[1]));
                v[i] += 0.5 * s;
            }
        }
        if v.iter().all(|x| *x == 0.0) {
            v[0] = 1.0;
        }
        v
    }
}

impl EmbeddingProvider for HashProvider {
    fn name(&self) -> &str {
        &self.name
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn embed(&self, texts: &[String]) -> Result<Vec<Vec<f64>>> {
        Ok(texts.iter().map(|t| self.embed_one(t)).collect())
    }
}

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in bytes {
        h ^= u64::from(*b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

// splitmix64 finalizer
fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embed::{cosine, normalize_l2};

    #[test]
    fn deterministic() {
        let p = HashProvider::new(64, 42);
        assert_eq!(p.embed_one("a b"), p.embed_one("a b"));
        assert_eq!(HashProvider::new(64, 42).embed_one("a b"), p.embed_one("a b"));
        assert_ne!(HashProvider::new(64, 43).embed_one("a b c d"), p.embed_one("a b c d"));
    }

    #[test]
    fn overlap_means_similarity() {
        let p = HashProvider::new(384, 42);
        let base = p.embed_one("kmeans clustering");
        let near = p.embed_one("kmeans clustering method");
        let far = p.embed_one("galaxy redshift survey");
        assert!(cosine(&base, &near) > cosine(&base, &far));
        assert!(cosine(&base, &near) > 0.7);
    }

    #[test]
    fn empty_text_is_first_basis_vector() {
        let p = HashProvider::new(16, 42);
        let mut e1 = vec![0.0; 16];
        e1[0] = 1.0;
        assert_eq!(p.embed_one(""), e1);
        assert_eq!(p.embed_one(" [SEP] "), e1);
        assert_eq!(normalize_l2(&p.embed_one("")).unwrap(), e1);
    }

    #[test]
    fn separator_breaks_bigrams() {
        let p = HashProvider::new(512, 42);
        let sep = p.embed_one("alpha [SEP] beta");
        let flat = p.embed_one("alpha beta");
        let words = p.embed_one("alpha gamma");
        assert_ne!(sep, flat);
        let uni: Vec<f64> = {
            let (a, sa) = p.bucket("alpha");
            let (b, sb) = p.bucket("beta");
            let mut v = vec![0.0; 512];
            v[a] += sa;
            v[b] += sb;
            v
        };
        assert_eq!(sep, uni);
        assert_ne!(words, uni);
    }
}

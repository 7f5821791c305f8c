//! On-disk cache of `S(π)` over `ℚ(v)`.
//!
//! File layout: magic `QHATS\0\0\0`, format version (u32 LE), payload length
//! (u64 LE), payload, SHA-256 of everything before it. The payload is UTF-8
//! text, one record per line:
//!
//! ```text
//! datum <canonical string>
//! pi <key>
//! block <λ> <dim> <rank>
//! weights <ν> <ν> ...
//! power <i> <+|-> <k> <rows> <cols>
//! e <row> <col> <rational function>      (nonzero entries only)
//! component <μ> <ν> <rows> <len>
//! x <row> <col> <rational function>      (nonzero entries only)
//! ```
//!
//! Files are named by the SHA-256 of the datum's canonical string and the key
//! of `π`, so the same algebra requested from different spec files shares one
//! entry.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use qhat_core::linalg::Matrix;
use qhat_core::qarith::{parse_ratfunc, FunctionField, RatFunc};
use qhat_core::rootdata::{RootDatum, SaturatedSet, Weight};
use qhat_core::schur::{Block, Component, SchurAlgebra};
use qhat_core::weylmod::Sign;
use sha2::{Digest, Sha256};
use thiserror::Error;

pub const MAGIC: &[u8; 8] = b"QHATS\0\0\0";
pub const VERSION: u32 = 1;
const HEADER: usize = 8 + 4 + 8;
const DIGEST: usize = 32;

#[derive(Debug, Error)]
pub enum CacheError {
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("not a cache file")]
    BadMagic,
    #[error("unsupported cache version {0}")]
    BadVersion(u32),
    #[error("file is {got} bytes, header says {expected}")]
    Length { expected: u64, got: u64 },
    #[error("checksum mismatch")]
    Checksum,
    #[error("line {line}: {message}")]
    Payload { line: usize, message: String },
    #[error("entry is for {got}, requested {expected}")]
    WrongEntry { expected: String, got: String },
}

/// Content address of `S(π)` for a datum.
pub fn cache_key(datum: &RootDatum, pi: &SaturatedSet) -> String {
    let mut h = Sha256::new();
    h.update(datum.canonical_string().as_bytes());
    h.update(b"\n");
    h.update(pi.key().as_bytes());
    hex(&h.finalize())
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

/// Upper bounds that keep a hostile file from forcing huge allocations.
const MAX_DIM: usize = 1 << 10;
const MAX_RANK: usize = 64;
const MAX_ENTRIES: usize = 1 << 22;

fn push_matrix(out: &mut String, tag: &str, m: &Matrix<RatFunc>) {
    for r in 0..m.rows() {
        for c in 0..m.cols() {
            let e = m.get(r, c);
            if !e.is_zero() {
                out.push_str(&format!("{tag} {r} {c} {e}\n"));
            }
        }
    }
}

/// The framed bytes of an algebra.
pub fn encode(s: &SchurAlgebra<FunctionField>) -> Vec<u8> {
    let mut p = String::new();
    p.push_str(&format!("datum {}\n", s.datum().canonical_string()));
    p.push_str(&format!("pi {}\n", s.pi().key()));
    let r = s.datum().rank();
    for b in s.blocks() {
        p.push_str(&format!("block {} {} {r}\n", b.lambda(), b.dim()));
        let ws: Vec<String> = b.weights().iter().map(|w| w.to_string()).collect();
        p.push_str(&format!("weights {}\n", ws.join(" ")));
        for i in 0..r {
            for sign in Sign::both() {
                for k in 1..=b.max_power(sign, i) {
                    let m = b.power(sign, i, k).expect("k ≤ max power");
                    p.push_str(&format!("power {i} {sign} {k} {} {}\n", m.rows(), m.cols()));
                    push_matrix(&mut p, "e", m);
                }
            }
        }
    }
    for c in s.basis_components() {
        let len = c.rows.first().map_or(0, |x| x.len());
        p.push_str(&format!(
            "component {} {} {} {len}\n",
            c.mu,
            c.nu,
            c.rows.len()
        ));
        for (k, row) in c.rows.iter().enumerate() {
            for (j, e) in row.iter().enumerate() {
                if !e.is_zero() {
                    p.push_str(&format!("x {k} {j} {e}\n"));
                }
            }
        }
    }
    frame(p.as_bytes())
}

fn frame(payload: &[u8]) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER + payload.len() + DIGEST);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(payload.len() as u64).to_le_bytes());
    out.extend_from_slice(payload);
    let digest = Sha256::digest(&out);
    out.extend_from_slice(&digest);
    out
}

/// Checks the framing and checksum and returns the payload text.
pub fn unframe(bytes: &[u8]) -> Result<&str, CacheError> {
    if bytes.len() < HEADER || &bytes[..8] != MAGIC {
        return Err(CacheError::BadMagic);
    }
    let version = u32::from_le_bytes(bytes[8..12].try_into().expect("4 bytes"));
    if version != VERSION {
        return Err(CacheError::BadVersion(version));
    }
    let len = u64::from_le_bytes(bytes[12..20].try_into().expect("8 bytes"));
    let expected = (HEADER as u64)
        .saturating_add(len)
        .saturating_add(DIGEST as u64);
    if bytes.len() as u64 != expected {
        return Err(CacheError::Length {
            expected,
            got: bytes.len() as u64,
        });
    }
    let body = bytes.len() - DIGEST;
    if Sha256::digest(&bytes[..body]).as_slice() != &bytes[body..] {
        return Err(CacheError::Checksum);
    }
    std::str::from_utf8(&bytes[HEADER..body]).map_err(|e| CacheError::Payload {
        line: 0,
        message: e.to_string(),
    })
}

/// The decoded contents of a cache file, before they are tied to a datum.
#[derive(Clone, Debug, PartialEq)]
pub struct Decoded {
    pub datum: String,
    pub pi: String,
    pub blocks: Vec<Block<RatFunc>>,
    pub components: Vec<Component<RatFunc>>,
}

struct Lines<'a> {
    it: std::iter::Peekable<std::iter::Enumerate<std::str::Lines<'a>>>,
    line: usize,
    /// Table entries still allowed.
    budget: usize,
}

impl<'a> Lines<'a> {
    fn err(&self, message: impl Into<String>) -> CacheError {
        CacheError::Payload {
            line: self.line,
            message: message.into(),
        }
    }

    fn charge(&mut self, n: usize) -> Result<(), CacheError> {
        self.budget = self
            .budget
            .checked_sub(n)
            .ok_or_else(|| self.err("tables are too large"))?;
        Ok(())
    }

    fn peek_tag(&mut self) -> Option<&'a str> {
        self.it
            .peek()
            .map(|(_, l)| l.split(' ').next().unwrap_or(""))
    }

    fn next(&mut self, tag: &str) -> Result<&'a str, CacheError> {
        let (n, l) = self
            .it
            .next()
            .ok_or_else(|| self.err(format!("missing '{tag}' line")))?;
        self.line = n + 1;
        l.strip_prefix(tag)
            .and_then(|r| r.strip_prefix(' ').or((r.is_empty()).then_some("")))
            .ok_or_else(|| self.err(format!("expected '{tag}'")))
    }
}

fn parse_weight(s: &str) -> Option<Weight> {
    let inner = s.strip_prefix('(')?.strip_suffix(')')?;
    if inner.is_empty() {
        return Some(Weight(Vec::new()));
    }
    inner
        .split(',')
        .map(|x| x.parse().ok())
        .collect::<Option<Vec<i64>>>()
        .map(Weight)
}

fn fields<const N: usize>(l: &Lines<'_>, s: &str) -> Result<[String; N], CacheError> {
    let parts: Vec<String> = s.split(' ').map(str::to_string).collect();
    parts
        .try_into()
        .map_err(|p: Vec<String>| l.err(format!("expected {N} fields, found {}", p.len())))
}

fn num(l: &Lines<'_>, s: &str) -> Result<usize, CacheError> {
    s.parse().map_err(|_| l.err(format!("bad number '{s}'")))
}

fn weight(l: &Lines<'_>, s: &str) -> Result<Weight, CacheError> {
    parse_weight(s).ok_or_else(|| l.err(format!("bad weight '{s}'")))
}

/// Sparse entries `tag r c value` into a `rows × cols` table.
fn entries(
    l: &mut Lines<'_>,
    tag: &str,
    rows: usize,
    cols: usize,
) -> Result<Vec<Vec<RatFunc>>, CacheError> {
    l.charge(rows.saturating_mul(cols))?;
    let mut out = vec![vec![RatFunc::zero(); cols]; rows];
    while l.peek_tag() == Some(tag) {
        let rest = l.next(tag)?;
        let mut it = rest.splitn(3, ' ');
        let (Some(r), Some(c), Some(v)) = (it.next(), it.next(), it.next()) else {
            return Err(l.err("short entry"));
        };
        let (r, c) = (num(l, r)?, num(l, c)?);
        if r >= rows || c >= cols {
            return Err(l.err(format!("entry ({r},{c}) outside {rows}×{cols}")));
        }
        let v = parse_ratfunc(v).map_err(|e| l.err(e.to_string()))?;
        if v.is_zero() {
            return Err(l.err("explicit zero entry"));
        }
        out[r][c] = v;
    }
    Ok(out)
}

/// Parses a payload.
pub fn decode(bytes: &[u8]) -> Result<Decoded, CacheError> {
    let text = unframe(bytes)?;
    let mut l = Lines {
        it: text.lines().enumerate().peekable(),
        line: 0,
        budget: MAX_ENTRIES,
    };
    let datum = l.next("datum")?.to_string();
    let pi = l.next("pi")?.to_string();
    let mut blocks = Vec::new();
    while l.peek_tag() == Some("block") {
        let [lam, dim, rank] = {
            let t = l.next("block")?;
            fields(&l, t)?
        };
        let (lambda, dim, rank) = (weight(&l, &lam)?, num(&l, &dim)?, num(&l, &rank)?);
        if dim > MAX_DIM || rank > MAX_RANK {
            return Err(l.err("block is too large"));
        }
        let ws = l.next("weights")?;
        let weights = if ws.is_empty() {
            Vec::new()
        } else {
            ws.split(' ')
                .map(|w| weight(&l, w))
                .collect::<Result<Vec<_>, _>>()?
        };
        if weights.len() != dim {
            return Err(l.err(format!("{} weights for dimension {dim}", weights.len())));
        }
        l.charge((2 * rank).max(1) * dim * dim)?;
        let id = Matrix::from_fn(dim, dim, |r, c| {
            if r == c {
                RatFunc::one()
            } else {
                RatFunc::zero()
            }
        });
        let mut powers: Vec<[Vec<Matrix<RatFunc>>; 2]> = (0..rank)
            .map(|_| [vec![id.clone()], vec![id.clone()]])
            .collect();
        while l.peek_tag() == Some("power") {
            let [i, s, k, rows, cols] = {
                let t = l.next("power")?;
                fields(&l, t)?
            };
            let (i, k, rows, cols) = (num(&l, &i)?, num(&l, &k)?, num(&l, &rows)?, num(&l, &cols)?);
            let slot = match s.as_str() {
                "+" => 0,
                "-" => 1,
                _ => return Err(l.err(format!("bad sign '{s}'"))),
            };
            if i >= rank || rows != dim || cols != dim || k != powers[i][slot].len() || k > dim {
                return Err(l.err("power out of sequence"));
            }
            let m = entries(&mut l, "e", rows, cols)?;
            powers[i][slot].push(Matrix::from_rows(m, cols));
        }
        blocks.push(Block::new(lambda, weights, powers));
    }
    let mut components = Vec::new();
    while l.peek_tag() == Some("component") {
        let [mu, nu, rows, len] = {
            let t = l.next("component")?;
            fields(&l, t)?
        };
        let (mu, nu, rows, len) = (
            weight(&l, &mu)?,
            weight(&l, &nu)?,
            num(&l, &rows)?,
            num(&l, &len)?,
        );
        let rows = entries(&mut l, "x", rows, len)?;
        components.push(Component { mu, nu, rows });
    }
    if l.it.peek().is_some() {
        l.line += 1;
        return Err(l.err("trailing data"));
    }
    Ok(Decoded {
        datum,
        pi,
        blocks,
        components,
    })
}

/// Rebuilds the algebra, checking that the entry belongs to `(datum, π)`.
pub fn into_algebra(
    d: Decoded,
    datum: &RootDatum,
    pi: &SaturatedSet,
) -> Result<SchurAlgebra<FunctionField>, CacheError> {
    if d.datum != datum.canonical_string() || d.pi != pi.key() {
        return Err(CacheError::WrongEntry {
            expected: format!("{} {}", datum.canonical_string(), pi.key()),
            got: format!("{} {}", d.datum, d.pi),
        });
    }
    if d.blocks.len() != pi.len()
        || d.blocks
            .iter()
            .zip(pi.elements())
            .any(|(b, l)| b.lambda() != l)
    {
        return Err(CacheError::Payload {
            line: 0,
            message: "blocks do not match π".into(),
        });
    }
    Ok(
        SchurAlgebra::from_blocks(FunctionField, datum.clone(), pi.clone(), d.blocks, false)
            .with_basis(d.components),
    )
}

/// A directory of cache files.
#[derive(Clone, Debug)]
pub struct Cache {
    dir: PathBuf,
}

impl Cache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Cache { dir: dir.into() }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn path(&self, datum: &RootDatum, pi: &SaturatedSet) -> PathBuf {
        self.dir.join(format!("{}.qs", cache_key(datum, pi)))
    }

    /// Writes to a temporary file in the cache directory, then renames it.
    pub fn store(&self, s: &SchurAlgebra<FunctionField>) -> Result<PathBuf, CacheError> {
        fs::create_dir_all(&self.dir)?;
        let path = self.path(s.datum(), s.pi());
        let mut tmp = tempfile::NamedTempFile::new_in(&self.dir)?;
        tmp.write_all(&encode(s))?;
        tmp.as_file().sync_all()?;
        tmp.persist(&path).map_err(|e| e.error)?;
        Ok(path)
    }

    /// `Ok(None)` when there is no entry.
    pub fn load(
        &self,
        datum: &RootDatum,
        pi: &SaturatedSet,
    ) -> Result<Option<SchurAlgebra<FunctionField>>, CacheError> {
        let path = self.path(datum, pi);
        let bytes = match fs::read(&path) {
            Ok(b) => b,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(None),
            Err(e) => return Err(e.into()),
        };
        into_algebra(decode(&bytes)?, datum, pi).map(Some)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use qhat_core::schur::SchurTower;

    fn algebra(preset: &str, gens: &[Vec<i64>]) -> SchurAlgebra<FunctionField> {
        let d = RootDatum::preset(preset).unwrap();
        let pi = d
            .saturate(&gens.iter().map(|g| Weight(g.clone())).collect::<Vec<_>>())
            .unwrap();
        SchurTower::new(d).algebra_uncached(&pi).unwrap()
    }

    fn same(a: &SchurAlgebra<FunctionField>, b: &SchurAlgebra<FunctionField>) -> bool {
        a.blocks() == b.blocks() && a.basis_components() == b.basis_components() && a.pi() == b.pi()
    }

    #[test]
    fn round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let cache = Cache::new(dir.path());
        for (p, g) in [
            ("A1", vec![vec![1]]),
            ("A1", vec![vec![2]]),
            ("B2", vec![vec![0, 1]]),
            ("A2", vec![vec![1, 1]]),
        ] {
            let s = algebra(p, &g);
            cache.store(&s).unwrap();
            let back = cache.load(s.datum(), s.pi()).unwrap().unwrap();
            assert!(same(&s, &back), "{p} {:?}", g);
            assert_eq!(back.realized_dimension(), s.realized_dimension());
            assert!(back.verify_presentation().passed());
        }
    }

    #[test]
    fn missing_entry() {
        let dir = tempfile::tempdir().unwrap();
        let s = algebra("A1", &[vec![1]]);
        assert!(Cache::new(dir.path())
            .load(s.datum(), s.pi())
            .unwrap()
            .is_none());
    }

    #[test]
    fn same_algebra_same_key() {
        let a = RootDatum::preset("A1").unwrap();
        let b = RootDatum::simply_connected("other name", vec![vec![2]]).unwrap();
        let pa = a.saturate(&[Weight(vec![2])]).unwrap();
        let pb = b.saturate(&[Weight(vec![0]), Weight(vec![2])]).unwrap();
        assert_eq!(cache_key(&a, &pa), cache_key(&b, &pb));
        assert_ne!(
            cache_key(&a, &pa),
            cache_key(&a, &a.saturate(&[Weight(vec![1])]).unwrap())
        );
    }

    #[test]
    fn damaged_files_are_rejected() {
        let bytes = encode(&algebra("A1", &[vec![2]]));
        assert!(decode(&bytes).is_ok());
        for cut in [0, 5, HEADER, bytes.len() / 2, bytes.len() - 1] {
            assert!(decode(&bytes[..cut]).is_err(), "cut at {cut}");
        }
        let mut flipped = bytes.clone();
        flipped[HEADER + 3] ^= 0x20;
        assert!(matches!(decode(&flipped), Err(CacheError::Checksum)));
        let mut v2 = bytes.clone();
        v2[8] = 2;
        assert!(matches!(decode(&v2), Err(CacheError::BadVersion(2))));
    }

    #[test]
    fn wrong_entry_is_rejected() {
        let s = algebra("A1", &[vec![1]]);
        let d = RootDatum::preset("A1").unwrap();
        let other = d.saturate(&[Weight(vec![2])]).unwrap();
        assert!(matches!(
            into_algebra(decode(&encode(&s)).unwrap(), &d, &other),
            Err(CacheError::WrongEntry { .. })
        ));
    }
}

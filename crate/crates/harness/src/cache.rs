//! Write-once on-disk cache of radial spectra.
//!
//! Files are line-oriented text: a header of `key = value` lines, then one
//! eigenvalue per line as a hexadecimal float, which round-trips exactly.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::Result;

pub const FORMAT_VERSION: u32 = 1;

/// Environment variable naming the default cache directory.
pub const CACHE_ENV: &str = "WEYLAB_CACHE_DIR";

/// Identifies one cached spectrum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumKey {
    pub beta: f64,
    pub n: usize,
    /// Tangential eigenvalue or interval length, per `source`.
    pub mu_or_l: f64,
    pub left_bc: String,
    pub right_bc: String,
    pub level: usize,
    /// Requested number of eigenvalues.
    pub count: usize,
}

impl SpectrumKey {
    /// Canonical text with reals rounded to `1e-12`.
    pub fn canonical(&self) -> String {
        let r = |x: f64| {
            let v = (x * 1e12).round() / 1e12;
            format!("{:.12}", if v == 0.0 { 0.0 } else { v })
        };
        format!(
            "beta={};n={};mu_or_l={};left={};right={};level={};count={}",
            r(self.beta),
            self.n,
            r(self.mu_or_l),
            self.left_bc,
            self.right_bc,
            self.level,
            self.count
        )
    }

    fn file_name(&self) -> String {
        let h = hex::encode(Sha256::digest(self.canonical().as_bytes()));
        format!("spectrum-{}.txt", &h[..24])
    }
}

/// C99-style hexadecimal float, e.g. `0x1.8000000000000p+1` for `3`.
pub fn to_hex_float(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    let sign = if x.is_sign_negative() { "-" } else { "" };
    if x.is_infinite() {
        return format!("{sign}inf");
    }
    let bits = x.to_bits();
    let exp = ((bits >> 52) & 0x7ff) as i64;
    let frac = bits & ((1u64 << 52) - 1);
    if exp == 0 {
        if frac == 0 {
            return format!("{sign}0x0.0000000000000p+0");
        }
        return format!("{sign}0x0.{frac:013x}p-1022");
    }
    format!("{sign}0x1.{frac:013x}p{:+}", exp - 1023)
}

pub fn parse_hex_float(s: &str) -> Option<f64> {
    let s = s.trim();
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s),
    };
    let v = match body {
        "nan" => f64::NAN,
        "inf" => f64::INFINITY,
        _ => {
            let body = body.strip_prefix("0x")?;
            let (mant, exp) = body.split_once('p')?;
            let (lead, frac) = mant.split_once('.')?;
            let exp: i64 = exp.parse().ok()?;
            if frac.len() != 13 {
                return None;
            }
            let frac = u64::from_str_radix(frac, 16).ok()?;
            match lead {
                "1" => {
                    let e = exp + 1023;
                    if !(1..=2046).contains(&e) {
                        return None;
                    }
                    f64::from_bits(((e as u64) << 52) | frac)
                }
                "0" if exp == -1022 || (frac == 0 && exp == 0) => f64::from_bits(frac),
                _ => return None,
            }
        }
    };
    Some(if neg { -v } else { v })
}

pub fn encode(key: &SpectrumKey, eigenvalues: &[f64]) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "format_version = {FORMAT_VERSION}");
    let _ = writeln!(s, "key = {}", key.canonical());
    let _ = writeln!(s, "count = {}", eigenvalues.len());
    for &v in eigenvalues {
        let _ = writeln!(s, "{}", to_hex_float(v));
    }
    s
}

#[derive(Debug, Clone, PartialEq)]
pub enum Decoded {
    Hit(Vec<f64>),
    VersionMismatch(u32),
    KeyMismatch,
    Corrupt(String),
}

pub fn decode(key: &SpectrumKey, text: &str) -> Decoded {
    let mut lines = text.lines();
    let mut header = |name: &str| -> Option<String> {
        let line = lines.next()?;
        let (k, v) = line.split_once('=')?;
        (k.trim() == name).then(|| v.trim().to_string())
    };
    let Some(version) = header("format_version").and_then(|v| v.parse::<u32>().ok()) else {
        return Decoded::Corrupt("missing format_version".into());
    };
    if version != FORMAT_VERSION {
        return Decoded::VersionMismatch(version);
    }
    let Some(stored) = header("key") else {
        return Decoded::Corrupt("missing key".into());
    };
    if stored != key.canonical() {
        return Decoded::KeyMismatch;
    }
    let Some(count) = header("count").and_then(|v| v.parse::<usize>().ok()) else {
        return Decoded::Corrupt("missing count".into());
    };
    let values: Option<Vec<f64>> = lines.map(parse_hex_float).collect();
    match values {
        Some(v) if v.len() == count => Decoded::Hit(v),
        Some(v) => Decoded::Corrupt(format!("expected {count} values, found {}", v.len())),
        None => Decoded::Corrupt("unparsable value".into()),
    }
}

/// Spectrum cache rooted at a directory, counting hits and misses.
#[derive(Debug)]
pub struct SpectrumCache {
    dir: PathBuf,
    hits: AtomicUsize,
    misses: AtomicUsize,
}

impl SpectrumCache {
    pub fn new(dir: impl Into<PathBuf>) -> Result<Self> {
        let dir = dir.into();
        std::fs::create_dir_all(&dir)?;
        Ok(Self {
            dir,
            hits: AtomicUsize::new(0),
            misses: AtomicUsize::new(0),
        })
    }

    /// Directory from the environment, if set.
    pub fn from_env() -> Result<Option<Self>> {
        match std::env::var_os(CACHE_ENV) {
            Some(d) if !d.is_empty() => Ok(Some(Self::new(PathBuf::from(d))?)),
            _ => Ok(None),
        }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn path_for(&self, key: &SpectrumKey) -> PathBuf {
        self.dir.join(key.file_name())
    }

    pub fn hits(&self) -> usize {
        self.hits.load(Ordering::Relaxed)
    }

    pub fn misses(&self) -> usize {
        self.misses.load(Ordering::Relaxed)
    }

    /// The stored spectrum, or `None` on a miss. Version mismatches and
    /// corrupt files count as misses.
    pub fn load(&self, key: &SpectrumKey) -> Option<Vec<f64>> {
        let path = self.path_for(key);
        let out = match std::fs::read_to_string(&path) {
            Err(_) => None,
            Ok(text) => match decode(key, &text) {
                Decoded::Hit(v) => Some(v),
                Decoded::VersionMismatch(v) => {
                    log::info!(
                        "cache {}: format version {v}, expected {FORMAT_VERSION}",
                        path.display()
                    );
                    None
                }
                Decoded::KeyMismatch => {
                    log::warn!("cache {}: key collision", path.display());
                    None
                }
                Decoded::Corrupt(why) => {
                    log::warn!("cache {}: corrupt ({why}); recomputing", path.display());
                    None
                }
            },
        };
        if out.is_some() {
            self.hits.fetch_add(1, Ordering::Relaxed);
        } else {
            self.misses.fetch_add(1, Ordering::Relaxed);
        }
        out
    }

    /// Stores a spectrum unless a valid entry exists. Returns whether it wrote.
    pub fn store(&self, key: &SpectrumKey, eigenvalues: &[f64]) -> Result<bool> {
        let path = self.path_for(key);
        if let Ok(text) = std::fs::read_to_string(&path) {
            if matches!(decode(key, &text), Decoded::Hit(_)) {
                return Ok(false);
            }
            std::fs::remove_file(&path)?;
        }
        let mut tmp = tempfile::NamedTempFile::new_in(&self.dir)?;
        tmp.write_all(encode(key, eigenvalues).as_bytes())?;
        tmp.flush()?;
        match tmp.persist_noclobber(&path) {
            Ok(_) => Ok(true),
            Err(e) if e.error.kind() == std::io::ErrorKind::AlreadyExists => Ok(false),
            Err(e) => Err(e.error.into()),
        }
    }

    /// Loads, or computes and stores.
    pub fn get_or_compute<F>(&self, key: &SpectrumKey, compute: F) -> Result<Vec<f64>>
    where
        F: FnOnce() -> Result<Vec<f64>>,
    {
        if let Some(v) = self.load(key) {
            return Ok(v);
        }
        let v = compute()?;
        self.store(key, &v)?;
        Ok(v)
    }
}

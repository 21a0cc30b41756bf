//! Run configuration: a flat sectioned key-value text format.
//!
//! ```ini
//! [benchmark]
//! kind = chain            # chain | bkc | bus | file
//! variant = homogeneous   # chain/bkc: homogeneous | heterogeneous
//! n = 100                 # chain/bkc: sites
//! m = 2                   # chain/bkc: external channels
//! # model_dir = model/    # file: directory with a.mat b.mat c.mat d.mat
//!
//! [qirka]
//! r = 10                  # reduced mode pairs (required)
//! # epsilon = 1e-6        # stopping tolerance on the shift change
//! # max_iter = 100        # iteration cap
//! # tau = 1e-12           # Gram-Schmidt deflation tolerance
//! # directions_per_shift = 2
//! # shifts = 0.1, 1.0+2.0i, 10.0   # explicit initial shifts (else log-spaced)
//!
//! [output]
//! # dir = out/run1        # overridden by --out
//! ```
//!
//! Every key outside `[benchmark] kind`, `n`, `m` and `[qirka] r` has a
//! default, so a minimal file names only the benchmark and (n, m, r).
//! Relative paths are resolved against the configuration file's directory.

use std::fmt;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use num_complex::Complex64;
use qirka_core::benchmarks::ChainVariant;
use qirka_core::{InitStrategy, QirkaConfig};

/// Which full-order model a run reduces.
#[derive(Debug, Clone)]
pub enum BenchmarkSpec {
    Chain {
        variant: ChainVariant,
        n: usize,
        m: usize,
    },
    Bkc {
        variant: ChainVariant,
        n: usize,
        m: usize,
    },
    Bus,
    File {
        model_dir: PathBuf,
    },
}

impl BenchmarkSpec {
    pub fn kind_label(&self) -> &'static str {
        match self {
            BenchmarkSpec::Chain { .. } => "chain",
            BenchmarkSpec::Bkc { .. } => "bkc",
            BenchmarkSpec::Bus => "bus",
            BenchmarkSpec::File { .. } => "file",
        }
    }

    pub fn variant_label(&self) -> &'static str {
        match self {
            BenchmarkSpec::Chain { variant, .. } | BenchmarkSpec::Bkc { variant, .. } => {
                variant.label()
            }
            BenchmarkSpec::Bus => "default",
            BenchmarkSpec::File { .. } => "external",
        }
    }
}

/// One fully resolved run request.
#[derive(Debug, Clone)]
pub struct RunConfig {
    /// Configuration file stem, used to label sweep rows and directories.
    pub label: String,
    pub benchmark: BenchmarkSpec,
    pub qirka: QirkaConfig,
    /// `[output] dir`, already resolved; the `--out` flag overrides it.
    pub out_dir: Option<PathBuf>,
}

/// Raw `key = value` with its source line, for error reporting.
struct RawEntry {
    line: usize,
    key: String,
    value: String,
    consumed: bool,
}

struct Section {
    name: String,
    line: usize,
    entries: Vec<RawEntry>,
}

fn parse_sections(path: &Path, text: &str) -> Result<Vec<Section>> {
    let mut sections: Vec<Section> = Vec::new();
    for (idx, raw_line) in text.lines().enumerate() {
        let line_no = idx + 1;
        // Strip trailing comments introduced by '#' or ';'.
        let stripped = match raw_line.find(['#', ';']) {
            Some(pos) => &raw_line[..pos],
            None => raw_line,
        };
        let line = stripped.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(name) = line.strip_prefix('[') {
            let Some(name) = name.strip_suffix(']') else {
                bail!("{}:{line_no}: unterminated section header", path.display());
            };
            sections.push(Section {
                name: name.trim().to_string(),
                line: line_no,
                entries: Vec::new(),
            });
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            bail!(
                "{}:{line_no}: expected `key = value` or `[section]`",
                path.display()
            );
        };
        let Some(section) = sections.last_mut() else {
            bail!(
                "{}:{line_no}: `{}` appears before any [section] header",
                path.display(),
                key.trim()
            );
        };
        let key = key.trim().to_string();
        if section.entries.iter().any(|e| e.key == key) {
            bail!(
                "{}:{line_no}: duplicate key `{key}` in [{}]",
                path.display(),
                section.name
            );
        }
        section.entries.push(RawEntry {
            line: line_no,
            key,
            value: value.trim().to_string(),
            consumed: false,
        });
    }
    Ok(sections)
}

/// Typed accessor over one section's entries.
struct SectionReader<'a> {
    path: &'a Path,
    section: &'a mut Section,
}

impl<'a> SectionReader<'a> {
    fn take(&mut self, key: &str) -> Option<(usize, String)> {
        self.section
            .entries
            .iter_mut()
            .find(|e| e.key == key && !e.consumed)
            .map(|e| {
                e.consumed = true;
                (e.line, e.value.clone())
            })
    }

    fn parsed<T>(&mut self, key: &str) -> Result<Option<T>>
    where
        T: std::str::FromStr,
        T::Err: fmt::Display,
    {
        match self.take(key) {
            None => Ok(None),
            Some((line, value)) => value.parse::<T>().map(Some).map_err(|e| {
                anyhow::anyhow!("{}:{line}: invalid `{key}` value `{value}`: {e}", self.path.display())
            }),
        }
    }

    fn required<T>(&mut self, key: &str) -> Result<T>
    where
        T: std::str::FromStr,
        T::Err: fmt::Display,
    {
        self.parsed(key)?.ok_or_else(|| {
            anyhow::anyhow!(
                "{}:{}: [{}] is missing required key `{key}`",
                self.path.display(),
                self.section.line,
                self.section.name
            )
        })
    }

    fn finish(self) -> Result<()> {
        if let Some(stale) = self.section.entries.iter().find(|e| !e.consumed) {
            bail!(
                "{}:{}: unknown key `{}` in [{}]",
                self.path.display(),
                stale.line,
                stale.key,
                self.section.name
            );
        }
        Ok(())
    }
}

fn parse_variant(path: &Path, reader: &mut SectionReader) -> Result<ChainVariant> {
    match reader.take("variant") {
        None => Ok(ChainVariant::Homogeneous),
        Some((line, value)) => match value.as_str() {
            "homogeneous" => Ok(ChainVariant::Homogeneous),
            "heterogeneous" => Ok(ChainVariant::Heterogeneous),
            other => bail!(
                "{}:{line}: unknown variant `{other}` (expected homogeneous or heterogeneous)",
                path.display()
            ),
        },
    }
}

/// Parses one complex scalar: `1.5`, `-2e-3`, `0.5+1.2i`, `0.5-1.2i`, `2i`.
pub fn parse_complex(token: &str) -> Result<Complex64> {
    let s: String = token.chars().filter(|c| !c.is_whitespace()).collect();
    if s.is_empty() {
        bail!("empty shift value");
    }
    if let Some(im_part) = s.strip_suffix('i') {
        // Split at the last '+' or '-' that is neither leading nor part of
        // an exponent.
        let bytes = im_part.as_bytes();
        let mut split = None;
        for pos in (1..bytes.len()).rev() {
            let c = bytes[pos] as char;
            if (c == '+' || c == '-') && !matches!(bytes[pos - 1] as char, 'e' | 'E') {
                split = Some(pos);
                break;
            }
        }
        match split {
            Some(pos) => {
                let re: f64 = im_part[..pos]
                    .parse()
                    .with_context(|| format!("bad real part in `{token}`"))?;
                let im_str = &im_part[pos..];
                let im: f64 = if im_str == "+" || im_str == "-" {
                    format!("{im_str}1").parse().unwrap()
                } else {
                    im_str
                        .parse()
                        .with_context(|| format!("bad imaginary part in `{token}`"))?
                };
                Ok(Complex64::new(re, im))
            }
            None => {
                let im: f64 = if im_part.is_empty() {
                    1.0
                } else {
                    im_part
                        .parse()
                        .with_context(|| format!("bad imaginary part in `{token}`"))?
                };
                Ok(Complex64::new(0.0, im))
            }
        }
    } else {
        let re: f64 = s
            .parse()
            .with_context(|| format!("bad shift value `{token}`"))?;
        Ok(Complex64::new(re, 0.0))
    }
}

/// Loads and validates one configuration file.
pub fn load_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read config {}", path.display()))?;
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    let label = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "run".to_string());

    let mut sections = parse_sections(path, &text)?;
    for section in &sections {
        if !matches!(section.name.as_str(), "benchmark" | "qirka" | "output") {
            bail!(
                "{}:{}: unknown section [{}]",
                path.display(),
                section.line,
                section.name
            );
        }
    }
    let mut names: Vec<&str> = sections.iter().map(|s| s.name.as_str()).collect();
    names.sort_unstable();
    names.dedup();
    if names.len() != sections.len() {
        bail!("{}: repeated section header", path.display());
    }

    // --- [benchmark] ---------------------------------------------------
    let benchmark = {
        let Some(section) = sections.iter_mut().find(|s| s.name == "benchmark") else {
            bail!("{}: missing [benchmark] section", path.display());
        };
        let mut reader = SectionReader { path, section };
        let (kind_line, kind) = reader
            .take("kind")
            .ok_or_else(|| anyhow::anyhow!("{}: [benchmark] needs `kind`", path.display()))?;
        let spec = match kind.as_str() {
            "chain" => BenchmarkSpec::Chain {
                variant: parse_variant(path, &mut reader)?,
                n: reader.required("n")?,
                m: reader.required("m")?,
            },
            "bkc" => BenchmarkSpec::Bkc {
                variant: parse_variant(path, &mut reader)?,
                n: reader.required("n")?,
                m: reader.required("m")?,
            },
            "bus" => BenchmarkSpec::Bus,
            "file" => {
                let (_, dir) = reader.take("model_dir").ok_or_else(|| {
                    anyhow::anyhow!("{}: `kind = file` needs `model_dir`", path.display())
                })?;
                BenchmarkSpec::File {
                    model_dir: base.join(dir),
                }
            }
            other => bail!(
                "{}:{kind_line}: unknown benchmark kind `{other}`",
                path.display()
            ),
        };
        reader.finish()?;
        spec
    };

    // --- [qirka] --------------------------------------------------------
    let qirka = {
        let Some(section) = sections.iter_mut().find(|s| s.name == "qirka") else {
            bail!("{}: missing [qirka] section", path.display());
        };
        let mut reader = SectionReader { path, section };
        let r: usize = reader.required("r")?;
        let mut config = QirkaConfig::new(r);
        if let Some(eps) = reader.parsed::<f64>("epsilon")? {
            config.epsilon = eps;
        }
        if let Some(cap) = reader.parsed::<usize>("max_iter")? {
            config.max_iter = cap;
        }
        if let Some(tau) = reader.parsed::<f64>("tau")? {
            config.tau = tau;
        }
        config.directions_per_shift = reader.parsed::<usize>("directions_per_shift")?;
        if let Some((line, value)) = reader.take("shifts") {
            let shifts = value
                .split(',')
                .map(parse_complex)
                .collect::<Result<Vec<_>>>()
                .map_err(|e| {
                    anyhow::anyhow!("{}:{line}: invalid `shifts`: {e:#}", path.display())
                })?;
            config.init = InitStrategy::UserProvided(shifts);
        }
        reader.finish()?;
        config
    };

    // --- [output] -------------------------------------------------------
    let out_dir = match sections.iter_mut().find(|s| s.name == "output") {
        None => None,
        Some(section) => {
            let mut reader = SectionReader { path, section };
            let dir = reader.take("dir").map(|(_, dir)| base.join(dir));
            reader.finish()?;
            dir
        }
    };

    Ok(RunConfig {
        label,
        benchmark,
        qirka,
        out_dir,
    })
}

//! Strict, line-oriented scenario configs.
//!
//! The format is `key = value` lines with `#` comments, grouped under
//! `[section]` headers; keys before the first section are common to all
//! commands. Parsing is strict: unknown sections, unknown keys, and
//! duplicated non-repeatable keys are fatal, because silently ignored
//! typos corrupt physics parameters.
//!
//! ```text
//! command = winding
//! units = natural
//!
//! [domain]
//! lx = 4.0
//! ly = 4.0
//!
//! [vortices]
//! core = 2.0 2.0 1      # x y w, repeatable; or: file = cores.txt
//!
//! [loop]
//! vertex = 1.5 1.5      # repeatable, 3 or more; or: file = loop.txt
//! vertex = 2.5 1.5
//! vertex = 2.5 2.5
//! vertex = 1.5 2.5
//! ```

use crate::emf::BFieldModel;
use crate::error::{Error, Result};
use crate::units::UnitMode;
use std::collections::BTreeMap;
use std::path::PathBuf;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Winding,
    Quantize,
    ManybodyCheck,
    Faraday,
    BerryEmf,
    Nernst,
}

impl Command {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "winding" => Ok(Command::Winding),
            "quantize" => Ok(Command::Quantize),
            "manybody-check" => Ok(Command::ManybodyCheck),
            "faraday" => Ok(Command::Faraday),
            "berry-emf" => Ok(Command::BerryEmf),
            "nernst" => Ok(Command::Nernst),
            other => Err(Error::Parse(format!(
                "unknown command `{other}` (expected winding, quantize, manybody-check, \
                 faraday, berry-emf, or nernst)"
            ))),
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Command::Winding => "winding",
            Command::Quantize => "quantize",
            Command::ManybodyCheck => "manybody-check",
            Command::Faraday => "faraday",
            Command::BerryEmf => "berry-emf",
            Command::Nernst => "nernst",
        }
    }
}

/// Keys shared by every command, given before the first section.
#[derive(Debug, Clone, PartialEq)]
pub struct CommonOpts {
    pub seed: Option<u64>,
    pub units: UnitMode,
    pub tol: Option<f64>,
    pub workers: usize,
    pub out: Option<PathBuf>,
}

impl Default for CommonOpts {
    fn default() -> Self {
        CommonOpts {
            seed: None,
            units: UnitMode::Natural,
            tol: None,
            workers: 1,
            out: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum CoreSource {
    Inline(Vec<(f64, f64, i64)>),
    File(PathBuf),
}

#[derive(Debug, Clone, PartialEq)]
pub enum LoopSource {
    Inline(Vec<(f64, f64)>),
    File(PathBuf),
}

/// `[domain]` + `[vortices]` + `[loop]` parameter block.
#[derive(Debug, Clone, PartialEq)]
pub struct GeometryParams {
    pub lx: f64,
    pub ly: f64,
    pub cores: CoreSource,
    pub loop_src: LoopSource,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FaradayParams {
    pub field: BFieldModel,
    pub loop_src: LoopSource,
    pub vx: f64,
    pub vy: f64,
    pub t0: f64,
    pub dt: f64,
    /// End of the CSV time sweep.
    pub t1: f64,
    /// Number of sweep samples; 0 writes a header-only trace.
    pub samples: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BerryEmfParams {
    pub geometry: GeometryParams,
    pub vx: f64,
    pub vy: f64,
    pub t0: f64,
    pub dt: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ManybodyCase {
    PlaneWave {
        kx: f64,
        ky: f64,
        sigma: f64,
    },
    Vortex {
        sigma: f64,
    },
    /// A wave function loaded from the binary tensor format; the grid
    /// keys are ignored in favor of the file header.
    File {
        path: PathBuf,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ManybodyParams {
    /// `(nx, ny, h)`; absent for the file case, whose header carries
    /// the mesh.
    pub grid: Option<(usize, usize, f64)>,
    pub case: ManybodyCase,
    /// Optional two-member mixture probabilities (plane-wave case only:
    /// the members carry phases `+k` and `-k`).
    pub mixture: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NernstParams {
    pub lx: f64,
    pub ly: f64,
    pub n_meron: f64,
    pub n_antimeron: f64,
    pub v0: f64,
    pub dt: f64,
    pub steps: usize,
    pub temperature_gradient: f64,
    pub loop_width: Option<f64>,
    pub realizations: usize,
    /// Optional sweep over `n_antimeron - n_meron` offsets.
    pub sweep_density_diff: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum CommandParams {
    Winding(GeometryParams),
    Quantize(GeometryParams),
    ManybodyCheck(ManybodyParams),
    Faraday(FaradayParams),
    BerryEmf(BerryEmfParams),
    Nernst(NernstParams),
}

/// A fully parsed scenario config. Parsing checks syntax and key
/// inventory; physical invariants are validated when the runner builds
/// the domain objects.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub command: Command,
    pub common: CommonOpts,
    pub params: CommandParams,
}

/// One section's key/value pairs, in file order.
#[derive(Debug, Default)]
struct Section {
    entries: Vec<(String, String)>,
    consumed: Vec<bool>,
}

impl Section {
    fn push(&mut self, key: String, value: String) {
        self.entries.push((key, value));
        self.consumed.push(false);
    }

    /// Takes a non-repeatable key; duplicate occurrences are an error.
    fn take_unique(&mut self, key: &str) -> Result<Option<String>> {
        let mut found: Option<String> = None;
        for (i, (k, v)) in self.entries.iter().enumerate() {
            if k == key {
                if found.is_some() {
                    return Err(Error::Parse(format!("key `{key}` given more than once")));
                }
                found = Some(v.clone());
                self.consumed[i] = true;
            }
        }
        Ok(found)
    }

    /// Takes all occurrences of a repeatable key, in order.
    fn take_repeated(&mut self, key: &str) -> Vec<String> {
        let mut out = Vec::new();
        for (i, (k, v)) in self.entries.iter().enumerate() {
            if k == key {
                out.push(v.clone());
                self.consumed[i] = true;
            }
        }
        out
    }

    fn leftovers(&self) -> Vec<String> {
        self.entries
            .iter()
            .zip(&self.consumed)
            .filter(|(_, &c)| !c)
            .map(|((k, _), _)| k.clone())
            .collect()
    }
}

fn parse_sections(text: &str) -> Result<BTreeMap<String, Section>> {
    let mut sections: BTreeMap<String, Section> = BTreeMap::new();
    let mut current = String::new(); // "" is the common (sectionless) block
    sections.insert(String::new(), Section::default());
    for (lineno, raw) in text.lines().enumerate() {
        let line = match raw.split('#').next() {
            Some(c) => c.trim(),
            None => "",
        };
        if line.is_empty() {
            continue;
        }
        if let Some(name) = line.strip_prefix('[') {
            let name = name
                .strip_suffix(']')
                .ok_or_else(|| {
                    Error::Parse(format!("line {}: unterminated section header", lineno + 1))
                })?
                .trim()
                .to_string();
            if name.is_empty() {
                return Err(Error::Parse(format!(
                    "line {}: empty section name",
                    lineno + 1
                )));
            }
            sections.entry(name.clone()).or_default();
            current = name;
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            Error::Parse(format!(
                "line {}: expected `key = value`, got `{line}`",
                lineno + 1
            ))
        })?;
        let key = key.trim().to_string();
        let value = value.trim().to_string();
        if key.is_empty() {
            return Err(Error::Parse(format!("line {}: empty key", lineno + 1)));
        }
        sections.get_mut(&current).unwrap().push(key, value);
    }
    Ok(sections)
}

fn req(section: &str, key: &str, v: Option<String>) -> Result<String> {
    v.ok_or_else(|| Error::Parse(format!("missing required key `{key}` in [{section}]")))
}

fn parse_num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse()
        .map_err(|_| Error::Parse(format!("key `{key}`: cannot parse `{v}`")))
}

fn parse_f64_list(key: &str, v: &str) -> Result<Vec<f64>> {
    v.split_whitespace().map(|t| parse_num(key, t)).collect()
}

struct Extractor {
    sections: BTreeMap<String, Section>,
}

impl Extractor {
    fn section(&mut self, name: &str) -> Result<&mut Section> {
        self.sections
            .get_mut(name)
            .ok_or_else(|| Error::Parse(format!("missing required section [{name}]")))
    }

    fn optional_section(&mut self, name: &str) -> Option<&mut Section> {
        self.sections.get_mut(name)
    }

    /// Every key must have been consumed and every section visited.
    fn finish(&self, visited: &[&str]) -> Result<()> {
        for (name, section) in &self.sections {
            if !name.is_empty() && !visited.contains(&name.as_str()) {
                return Err(Error::Parse(format!("unknown section [{name}]")));
            }
            let left = section.leftovers();
            if !left.is_empty() {
                let place = if name.is_empty() {
                    "the common block".to_string()
                } else {
                    format!("[{name}]")
                };
                return Err(Error::Parse(format!(
                    "unknown key(s) {} in {place}",
                    left.join(", ")
                )));
            }
        }
        Ok(())
    }
}

fn extract_geometry(ex: &mut Extractor) -> Result<GeometryParams> {
    let dom = ex.section("domain")?;
    let lx: f64 = parse_num("lx", &req("domain", "lx", dom.take_unique("lx")?)?)?;
    let ly: f64 = parse_num("ly", &req("domain", "ly", dom.take_unique("ly")?)?)?;

    let vort = ex.section("vortices")?;
    let inline = vort.take_repeated("core");
    let file = vort.take_unique("file")?;
    let cores = match (inline.is_empty(), file) {
        (false, None) => {
            let mut cores = Vec::new();
            for line in inline {
                let f: Vec<&str> = line.split_whitespace().collect();
                if f.len() != 3 {
                    return Err(Error::Parse(format!("core `{line}`: expected `x y w`")));
                }
                cores.push((
                    parse_num("core.x", f[0])?,
                    parse_num("core.y", f[1])?,
                    parse_num("core.w", f[2])?,
                ));
            }
            CoreSource::Inline(cores)
        }
        (true, Some(path)) => CoreSource::File(PathBuf::from(path)),
        (true, None) => CoreSource::Inline(Vec::new()),
        (false, Some(_)) => {
            return Err(Error::Parse(
                "[vortices] must use either inline `core` lines or `file`, not both".into(),
            ))
        }
    };

    let loop_src = extract_loop(ex)?;
    Ok(GeometryParams {
        lx,
        ly,
        cores,
        loop_src,
    })
}

fn extract_loop(ex: &mut Extractor) -> Result<LoopSource> {
    let sec = ex.section("loop")?;
    let inline = sec.take_repeated("vertex");
    let file = sec.take_unique("file")?;
    match (inline.is_empty(), file) {
        (false, None) => {
            let mut vertices = Vec::new();
            for line in inline {
                let f: Vec<&str> = line.split_whitespace().collect();
                if f.len() != 2 {
                    return Err(Error::Parse(format!("vertex `{line}`: expected `x y`")));
                }
                vertices.push((parse_num("vertex.x", f[0])?, parse_num("vertex.y", f[1])?));
            }
            Ok(LoopSource::Inline(vertices))
        }
        (true, Some(path)) => Ok(LoopSource::File(PathBuf::from(path))),
        (true, None) => Err(Error::Parse(
            "[loop] needs `vertex` lines or a `file` key".into(),
        )),
        (false, Some(_)) => Err(Error::Parse(
            "[loop] must use either inline `vertex` lines or `file`, not both".into(),
        )),
    }
}

fn extract_field(ex: &mut Extractor) -> Result<BFieldModel> {
    let sec = ex.section("field")?;
    let family = req("field", "family", sec.take_unique("family")?)?;
    let mut num = |key: &str, default: Option<f64>| -> Result<f64> {
        match (sec.take_unique(key)?, default) {
            (Some(v), _) => parse_num(key, &v),
            (None, Some(d)) => Ok(d),
            (None, None) => Err(Error::Parse(format!(
                "field family `{family}` needs key `{key}`"
            ))),
        }
    };
    match family.as_str() {
        "uniform" => Ok(BFieldModel::Uniform {
            b0: num("b0", None)?,
        }),
        "linear_x" => Ok(BFieldModel::LinearX {
            gamma: num("gamma", None)?,
        }),
        "linear_t" => Ok(BFieldModel::LinearT {
            beta: num("beta", None)?,
        }),
        "sinusoidal" => Ok(BFieldModel::Sinusoidal {
            amplitude: num("amplitude", None)?,
            kx: num("kx", Some(0.0))?,
            ky: num("ky", Some(0.0))?,
            omega: num("omega", Some(0.0))?,
            phase: num("phase", Some(0.0))?,
        }),
        other => Err(Error::Parse(format!(
            "unknown field family `{other}` (expected uniform, linear_x, linear_t, sinusoidal)"
        ))),
    }
}

fn extract_motion(
    ex: &mut Extractor,
    with_sweep: bool,
) -> Result<(f64, f64, f64, f64, f64, usize)> {
    let sec = ex.section("motion")?;
    let vx: f64 = parse_num("vx", &sec.take_unique("vx")?.unwrap_or_else(|| "0".into()))?;
    let vy: f64 = parse_num("vy", &sec.take_unique("vy")?.unwrap_or_else(|| "0".into()))?;
    let t0: f64 = parse_num("t0", &sec.take_unique("t0")?.unwrap_or_else(|| "0".into()))?;
    let dt: f64 = parse_num("dt", &req("motion", "dt", sec.take_unique("dt")?)?)?;
    let (t1, samples) = if with_sweep {
        let t1: f64 = parse_num(
            "t1",
            &sec.take_unique("t1")?.unwrap_or_else(|| t0.to_string()),
        )?;
        let samples: usize = parse_num(
            "samples",
            &sec.take_unique("samples")?.unwrap_or_else(|| "1".into()),
        )?;
        (t1, samples)
    } else {
        (t0, 0)
    };
    Ok((vx, vy, t0, dt, t1, samples))
}

impl ScenarioConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut ex = Extractor {
            sections: parse_sections(text)?,
        };

        let common_section = ex.section("")?;
        let command = Command::parse(&req(
            "common block",
            "command",
            common_section.take_unique("command")?,
        )?)?;
        let seed = common_section
            .take_unique("seed")?
            .map(|v| parse_num::<u64>("seed", &v))
            .transpose()?;
        let units = match common_section.take_unique("units")?.as_deref() {
            None | Some("natural") => UnitMode::Natural,
            Some("si") => UnitMode::Si,
            Some(other) => {
                return Err(Error::Parse(format!(
                    "unknown units `{other}` (expected natural or si)"
                )))
            }
        };
        let tol = common_section
            .take_unique("tol")?
            .map(|v| parse_num::<f64>("tol", &v))
            .transpose()?;
        let workers = common_section
            .take_unique("workers")?
            .map(|v| parse_num::<usize>("workers", &v))
            .transpose()?
            .unwrap_or(1);
        let out = common_section.take_unique("out")?.map(PathBuf::from);
        let common = CommonOpts {
            seed,
            units,
            tol,
            workers,
            out,
        };

        let (params, visited): (CommandParams, Vec<&str>) = match command {
            Command::Winding => (
                CommandParams::Winding(extract_geometry(&mut ex)?),
                vec!["domain", "vortices", "loop"],
            ),
            Command::Quantize => (
                CommandParams::Quantize(extract_geometry(&mut ex)?),
                vec!["domain", "vortices", "loop"],
            ),
            Command::Faraday => {
                let field = extract_field(&mut ex)?;
                let loop_src = extract_loop(&mut ex)?;
                let (vx, vy, t0, dt, t1, samples) = extract_motion(&mut ex, true)?;
                (
                    CommandParams::Faraday(FaradayParams {
                        field,
                        loop_src,
                        vx,
                        vy,
                        t0,
                        dt,
                        t1,
                        samples,
                    }),
                    vec!["field", "loop", "motion"],
                )
            }
            Command::BerryEmf => {
                let geometry = extract_geometry(&mut ex)?;
                let (vx, vy, t0, dt, _, _) = extract_motion(&mut ex, false)?;
                (
                    CommandParams::BerryEmf(BerryEmfParams {
                        geometry,
                        vx,
                        vy,
                        t0,
                        dt,
                    }),
                    vec!["domain", "vortices", "loop", "motion"],
                )
            }
            Command::ManybodyCheck => {
                let case_sec = ex.section("case")?;
                let kind = req("case", "kind", case_sec.take_unique("kind")?)?;
                let sigma: f64 = parse_num(
                    "sigma",
                    &case_sec
                        .take_unique("sigma")?
                        .unwrap_or_else(|| "1.5".into()),
                )?;
                let case = match kind.as_str() {
                    "plane-wave" => ManybodyCase::PlaneWave {
                        kx: parse_num(
                            "kx",
                            &case_sec.take_unique("kx")?.unwrap_or_else(|| "1".into()),
                        )?,
                        ky: parse_num(
                            "ky",
                            &case_sec.take_unique("ky")?.unwrap_or_else(|| "0".into()),
                        )?,
                        sigma,
                    },
                    "vortex" => ManybodyCase::Vortex { sigma },
                    "file" => ManybodyCase::File {
                        path: PathBuf::from(req("case", "path", case_sec.take_unique("path")?)?),
                    },
                    other => {
                        return Err(Error::Parse(format!(
                            "unknown case kind `{other}` (expected plane-wave, vortex, or file)"
                        )))
                    }
                };
                let grid = match case {
                    ManybodyCase::File { .. } => {
                        if ex.optional_section("grid").is_some() {
                            return Err(Error::Parse(
                                "[grid] is not used with kind = file; the file header \
                                 carries the mesh"
                                    .into(),
                            ));
                        }
                        None
                    }
                    _ => {
                        let sec = ex.section("grid")?;
                        let nx: usize =
                            parse_num("nx", &req("grid", "nx", sec.take_unique("nx")?)?)?;
                        let ny: usize =
                            parse_num("ny", &req("grid", "ny", sec.take_unique("ny")?)?)?;
                        let h: f64 = parse_num("h", &req("grid", "h", sec.take_unique("h")?)?)?;
                        Some((nx, ny, h))
                    }
                };
                let mixture = match ex.optional_section("mixture") {
                    Some(sec) => Some(parse_f64_list(
                        "probabilities",
                        &req(
                            "mixture",
                            "probabilities",
                            sec.take_unique("probabilities")?,
                        )?,
                    )?),
                    None => None,
                };
                (
                    CommandParams::ManybodyCheck(ManybodyParams {
                        grid,
                        case,
                        mixture,
                    }),
                    vec!["grid", "case", "mixture"],
                )
            }
            Command::Nernst => {
                let sec = ex.section("scenario")?;
                let mut num = |key: &str| -> Result<f64> {
                    parse_num(key, &req("scenario", key, sec.take_unique(key)?)?)
                };
                let lx = num("lx")?;
                let ly = num("ly")?;
                let n_meron = num("n_meron")?;
                let n_antimeron = num("n_antimeron")?;
                let v0 = num("v0")?;
                let dt = num("dt")?;
                let temperature_gradient = num("temperature_gradient")?;
                let steps: usize = parse_num(
                    "steps",
                    &req("scenario", "steps", sec.take_unique("steps")?)?,
                )?;
                let realizations: usize = parse_num(
                    "realizations",
                    &sec.take_unique("realizations")?
                        .unwrap_or_else(|| "1".into()),
                )?;
                let loop_width = sec
                    .take_unique("loop_width")?
                    .map(|v| parse_num::<f64>("loop_width", &v))
                    .transpose()?;
                let sweep_density_diff = match ex.optional_section("sweep") {
                    Some(sweep) => Some(parse_f64_list(
                        "density_diff",
                        &req("sweep", "density_diff", sweep.take_unique("density_diff")?)?,
                    )?),
                    None => None,
                };
                (
                    CommandParams::Nernst(NernstParams {
                        lx,
                        ly,
                        n_meron,
                        n_antimeron,
                        v0,
                        dt,
                        steps,
                        temperature_gradient,
                        loop_width,
                        realizations,
                        sweep_density_diff,
                    }),
                    vec!["scenario", "sweep"],
                )
            }
        };

        ex.finish(&visited)?;
        Ok(ScenarioConfig {
            command,
            common,
            params,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const WINDING_CFG: &str = "\
# minimal winding scenario
command = winding

[domain]
lx = 4.0
ly = 4.0

[vortices]
core = 2.0 2.0 1

[loop]
vertex = 1.5 1.5
vertex = 2.5 1.5
vertex = 2.5 2.5
vertex = 1.5 2.5
";

    #[test]
    fn parses_minimal_winding_config() {
        let cfg = ScenarioConfig::parse(WINDING_CFG).unwrap();
        assert_eq!(cfg.command, Command::Winding);
        assert_eq!(cfg.common.units, UnitMode::Natural);
        match cfg.params {
            CommandParams::Winding(g) => {
                assert_eq!(g.lx, 4.0);
                assert_eq!(g.cores, CoreSource::Inline(vec![(2.0, 2.0, 1)]));
                match g.loop_src {
                    LoopSource::Inline(v) => assert_eq!(v.len(), 4),
                    _ => panic!("expected inline loop"),
                }
            }
            _ => panic!("expected winding params"),
        }
    }

    #[test]
    fn unknown_key_is_fatal() {
        let text = WINDING_CFG.replace("core = 2.0 2.0 1", "core = 2.0 2.0 1\nwyndings = 3");
        let err = ScenarioConfig::parse(&text).unwrap_err();
        assert!(matches!(err, Error::Parse(msg) if msg.contains("wyndings")));
    }

    #[test]
    fn unknown_section_is_fatal() {
        let text = format!("{WINDING_CFG}\n[extra]\nx = 1\n");
        assert!(matches!(
            ScenarioConfig::parse(&text).unwrap_err(),
            Error::Parse(_)
        ));
    }

    #[test]
    fn duplicate_unique_key_is_fatal() {
        let text = WINDING_CFG.replace("lx = 4.0", "lx = 4.0\nlx = 5.0");
        assert!(matches!(
            ScenarioConfig::parse(&text).unwrap_err(),
            Error::Parse(_)
        ));
    }

    #[test]
    fn missing_command_is_fatal() {
        let text = WINDING_CFG.replace("command = winding\n", "");
        assert!(matches!(
            ScenarioConfig::parse(&text).unwrap_err(),
            Error::Parse(_)
        ));
    }

    #[test]
    fn bad_number_is_fatal() {
        let text = WINDING_CFG.replace("lx = 4.0", "lx = four");
        assert!(matches!(
            ScenarioConfig::parse(&text).unwrap_err(),
            Error::Parse(_)
        ));
    }

    #[test]
    fn parses_nernst_with_sweep() {
        let text = "\
command = nernst
seed = 42
workers = 2

[scenario]
lx = 10
ly = 10
n_meron = 1
n_antimeron = 2
v0 = 1
dt = 0.0125
steps = 700
temperature_gradient = 1
realizations = 200

[sweep]
density_diff = -2 -1 0 1 2
";
        let cfg = ScenarioConfig::parse(text).unwrap();
        assert_eq!(cfg.common.seed, Some(42));
        assert_eq!(cfg.common.workers, 2);
        match cfg.params {
            CommandParams::Nernst(p) => {
                assert_eq!(p.realizations, 200);
                assert_eq!(p.sweep_density_diff, Some(vec![-2.0, -1.0, 0.0, 1.0, 2.0]));
            }
            _ => panic!("expected nernst params"),
        }
    }

    #[test]
    fn parses_faraday_families() {
        let text = "\
command = faraday

[field]
family = sinusoidal
amplitude = 0.9
kx = 1.7
omega = 2.3

[loop]
vertex = 0 0
vertex = 1 0
vertex = 1 1
vertex = 0 1

[motion]
vx = 0.5
dt = 1e-4
t1 = 1.0
samples = 20
";
        let cfg = ScenarioConfig::parse(text).unwrap();
        match cfg.params {
            CommandParams::Faraday(p) => {
                assert_eq!(
                    p.field,
                    BFieldModel::Sinusoidal {
                        amplitude: 0.9,
                        kx: 1.7,
                        ky: 0.0,
                        omega: 2.3,
                        phase: 0.0
                    }
                );
                assert_eq!(p.samples, 20);
            }
            _ => panic!("expected faraday params"),
        }
    }

    #[test]
    fn parses_manybody_with_mixture() {
        let text = "\
command = manybody-check

[grid]
nx = 24
ny = 24
h = 0.4

[case]
kind = plane-wave
kx = 1.3
ky = -0.7
sigma = 1.5

[mixture]
probabilities = 0.75 0.25
";
        let cfg = ScenarioConfig::parse(text).unwrap();
        match cfg.params {
            CommandParams::ManybodyCheck(p) => {
                assert_eq!(p.mixture, Some(vec![0.75, 0.25]));
            }
            _ => panic!("expected manybody params"),
        }
    }

    #[test]
    fn vortex_file_reference() {
        let text = WINDING_CFG.replace("core = 2.0 2.0 1", "file = cores.txt");
        let cfg = ScenarioConfig::parse(&text).unwrap();
        match cfg.params {
            CommandParams::Winding(g) => {
                assert_eq!(g.cores, CoreSource::File(PathBuf::from("cores.txt")));
            }
            _ => unreachable!(),
        }
    }
}

use std::collections::BTreeMap;
use std::path::Path;

use ini::Ini;

use crate::error::CliError;

/// One setting accepted both as `--name VALUE` and as `name = VALUE` in a
/// config file.
#[derive(Clone, Copy, Debug)]
pub struct Key {
    pub name: &'static str,
    pub default: Option<&'static str>,
    pub help: &'static str,
    pub switch: bool,
}

const fn key(name: &'static str, default: Option<&'static str>, help: &'static str) -> Key {
    Key {
        name,
        default,
        help,
        switch: false,
    }
}

const fn switch(name: &'static str, help: &'static str) -> Key {
    Key {
        name,
        default: Some("false"),
        help,
        switch: true,
    }
}

pub const GLOBAL: &[Key] = &[
    key("out", None, "directory for reports; stdout when absent"),
    key("jobs", None, "worker threads (default: available parallelism)"),
    key("seed", Some("0"), "seed for randomized self-checks"),
    key("quad-tol", Some("1e-9"), "relative tolerance of the adaptive quadrature"),
    switch("no-timing", "omit wall-clock fields so reports are byte-reproducible"),
];

const CASE: [Key; 4] = [
    key("case", None, "Eu-a, Eu-b, Eu-c, Hyp-a, Hyp-b, Ex-a or Ex-b"),
    key("beta", None, "case exponent beta"),
    key("gamma", None, "log exponent gamma (Eu-b)"),
    key("n", Some("3"), "dimension of the end"),
];

const CUSTOM: [Key; 4] = [
    key("sigma", None, "warping function descriptor, e.g. `sinh()` (instead of --case)"),
    key("h", None, "weight exponent per unit tau, e.g. `2*power(1)`"),
    key("g", Some("0*const(0)"), "gauge descriptor"),
    key("r0", Some("0"), "inner radius of the end"),
];

pub struct CommandSpec {
    pub name: &'static str,
    pub about: &'static str,
    pub keys: Vec<Key>,
    pub positional: &'static [&'static str],
}

fn with(parts: &[&[Key]]) -> Vec<Key> {
    parts.iter().flat_map(|p| p.iter().copied()).collect()
}

pub fn commands() -> Vec<CommandSpec> {
    vec![
        CommandSpec {
            name: "weights",
            about: "Tabulate the weight bundle (F, A, k2L, k2R, k2, k1max) on a radial grid",
            keys: with(&[
                &CASE,
                &CUSTOM,
                &[
                    key("tau", Some("10"), "weight parameter tau"),
                    key("r-min", None, "first radius (default: just inside the domain, at least 2)"),
                    key("r-max", Some("1000"), "last radius"),
                    key("points", Some("64"), "geometric grid size"),
                ],
            ]),
            positional: &[],
        },
        CommandSpec {
            name: "scan",
            about: "Admissibility scan of the weight bundle",
            keys: with(&[
                &CASE,
                &CUSTOM,
                &[
                    key("tau", Some("10"), "weight parameter tau"),
                    key("r-min", None, "first radius (default: just inside the domain, at least 2)"),
                    key("r-max", Some("100000"), "last radius"),
                    key("points", Some("256"), "geometric grid size"),
                ],
            ]),
            positional: &[],
        },
        CommandSpec {
            name: "verify",
            about: "Mode-reduced Carleman battery over a tau ladder, eigenvalues and bumps",
            keys: with(&[
                &CASE,
                &[
                    key("tau0", Some("10"), "first rung of the tau ladder"),
                    key("steps", Some("3"), "rungs tau0 * 2^k"),
                    key("modes", Some("4"), "number of section eigenvalues"),
                    key(
                        "bumps",
                        Some("exp-bump,quintic-bump,shifted-sine-squared"),
                        "comma-separated bump profiles",
                    ),
                    key("support", None, "a,b (default: [1.25 r_adm, 2.5 r_adm])"),
                ],
            ]),
            positional: &[],
        },
        CommandSpec {
            name: "extended",
            about: "Extended estimate for exp(-c r^beta) tails along truncation radii",
            keys: with(&[
                &CASE,
                &[
                    key("tau", Some("10"), "weight parameter tau"),
                    key("lambda", Some("1"), "constant Lambda on the right-hand side"),
                    key("tail-c", Some("1"), "tail coefficient c"),
                    key("tail-beta", Some("3"), "tail exponent beta"),
                    key("start", None, "inner edge of the test function (default: 1.25 r_adm)"),
                    key("radii", None, "comma-separated truncation radii (default: 4, 8, 16 times start)"),
                ],
            ]),
            positional: &[],
        },
        CommandSpec {
            name: "certify",
            about: "Full hypothesis certificate for one case",
            keys: with(&[
                &CASE,
                &[
                    key("tau0", Some("10"), "first rung of the tau ladder"),
                    switch("auto-tau0", "double tau0 until the admissible radius fits the scan window"),
                    key("modes", Some("4"), "number of section eigenvalues in the battery"),
                ],
            ]),
            positional: &[],
        },
        CommandSpec {
            name: "curvature",
            about: "Curvature of the warped end and the growth constants kappa and C",
            keys: vec![
                key("sigma", Some("sinh()"), "warping function descriptor"),
                key("space-form", None, "curvature B of a space form (overrides --sigma)"),
                key("n", Some("3"), "dimension of the end"),
                key("r-max", Some("1000"), "largest radius of the growth checks"),
                key("points", Some("20"), "radii in the curvature table"),
            ],
            positional: &[],
        },
        CommandSpec {
            name: "cutoff",
            about: "Laplacian cutoff ladder phi_R = Phi(r / R)",
            keys: vec![
                key("sigma", Some("power(1)"), "warping function descriptor"),
                key("n", Some("3"), "dimension of the end"),
                key("radii", Some("10,100,1000"), "comma-separated radii R"),
                key("profile", Some("smoothstep()"), "cutoff profile Phi"),
            ],
            positional: &[],
        },
        CommandSpec {
            name: "catenoid",
            about: "Hyperbolic catenoid end: profile, source term q and decay report",
            keys: vec![
                key("n", Some("3"), "dimension of the end (2..=5 are the reference runs)"),
                key("r-end", Some("14"), "outer radius of the profile"),
            ],
            positional: &[],
        },
        CommandSpec {
            name: "conformal",
            about: "Whether a positive Yamabe solution with a given envelope is ruled out",
            keys: vec![
                key("n", Some("3"), "dimension (>= 3)"),
                key("alpha", Some("power(2)"), "conformal exponent alpha as a descriptor"),
                key("alpha-symbol", None, "growth symbol of alpha (default: derived from --alpha)"),
                key("envelope", None, "growth symbol of the envelope of u, e.g. `exp(-0.25*r^2)`"),
            ],
            positional: &[],
        },
        CommandSpec {
            name: "growth",
            about: "Parse one growth expression, or compare two",
            keys: vec![
                key("expr", None, "growth expression"),
                key("other", None, "second expression to compare against"),
                key("trials", Some("0"), "randomized round-trip and preorder self-checks"),
            ],
            positional: &["expr", "other"],
        },
    ]
}

/// Key/value pairs read from a config file, grouped by section.
#[derive(Debug, Default)]
pub struct ConfigFile {
    pub global: BTreeMap<String, String>,
    pub sections: BTreeMap<String, BTreeMap<String, String>>,
}

fn normalize(key: &str) -> String {
    key.trim().replace('_', "-")
}

pub fn load(path: &Path, specs: &[CommandSpec]) -> Result<ConfigFile, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
    parse(&text, specs).map_err(|e| match e {
        CliError::Usage(m) => CliError::Usage(format!("{}: {m}", path.display())),
        other => other,
    })
}

/// Parses `key = value` lines with `[section]` headers and `#` comments,
/// rejecting unknown sections, unknown keys and repeated keys.
pub fn parse(text: &str, specs: &[CommandSpec]) -> Result<ConfigFile, CliError> {
    let ini = Ini::load_from_str(text).map_err(|e| CliError::Usage(format!("config syntax: {e}")))?;
    let mut out = ConfigFile::default();
    for (section, props) in ini.iter() {
        let allowed: Vec<&str> = match section {
            None => GLOBAL.iter().map(|k| k.name).collect(),
            Some(s) => {
                let spec = specs
                    .iter()
                    .find(|c| c.name == s)
                    .ok_or_else(|| CliError::Usage(format!("unknown config section [{s}]")))?;
                GLOBAL.iter().chain(&spec.keys).map(|k| k.name).collect()
            }
        };
        if section.is_some() && ini.section_all(section).count() > 1 {
            return Err(CliError::Usage(format!("section [{}] appears twice", section.unwrap_or(""))));
        }
        let target = match section {
            None => &mut out.global,
            Some(s) => out.sections.entry(s.to_string()).or_default(),
        };
        for (k, v) in props.iter() {
            let k = normalize(k);
            if !allowed.contains(&k.as_str()) {
                let place = section.map_or("top level".to_string(), |s| format!("[{s}]"));
                return Err(CliError::Usage(format!("unknown config key `{k}` in {place}")));
            }
            if target.insert(k.clone(), v.trim().to_string()).is_some() {
                return Err(CliError::Usage(format!("config key `{k}` given twice")));
            }
        }
    }
    Ok(out)
}

/// Resolved settings of one run: defaults, then the config file, then flags.
#[derive(Clone, Debug)]
pub struct Settings {
    pub command: &'static str,
    values: BTreeMap<&'static str, String>,
}

impl Settings {
    pub fn resolve(
        spec: &CommandSpec,
        file: Option<&ConfigFile>,
        flags: &BTreeMap<&'static str, String>,
    ) -> Settings {
        let mut values = BTreeMap::new();
        for k in GLOBAL.iter().chain(&spec.keys) {
            if let Some(d) = k.default {
                values.insert(k.name, d.to_string());
            }
        }
        if let Some(file) = file {
            let layers = [Some(&file.global), file.sections.get(spec.name)];
            for layer in layers.into_iter().flatten() {
                for (k, v) in layer {
                    if let Some(key) = GLOBAL.iter().chain(&spec.keys).find(|key| key.name == k) {
                        values.insert(key.name, v.clone());
                    }
                }
            }
        }
        for (k, v) in flags {
            values.insert(k, v.clone());
        }
        Settings {
            command: spec.name,
            values,
        }
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    pub fn has(&self, key: &str) -> bool {
        self.values.contains_key(key)
    }

    pub fn str(&self, key: &str) -> Result<&str, CliError> {
        self.raw(key)
            .ok_or_else(|| CliError::Usage(format!("missing required setting --{key}")))
    }

    pub fn f64(&self, key: &str) -> Result<f64, CliError> {
        parse_f64(key, self.str(key)?)
    }

    pub fn opt_f64(&self, key: &str) -> Result<Option<f64>, CliError> {
        self.raw(key).map(|v| parse_f64(key, v)).transpose()
    }

    pub fn usize(&self, key: &str) -> Result<usize, CliError> {
        let v = self.str(key)?;
        v.parse()
            .map_err(|_| CliError::Usage(format!("--{key} expects a non-negative integer, got `{v}`")))
    }

    pub fn u64(&self, key: &str) -> Result<u64, CliError> {
        let v = self.str(key)?;
        v.parse()
            .map_err(|_| CliError::Usage(format!("--{key} expects a non-negative integer, got `{v}`")))
    }

    pub fn bool(&self, key: &str) -> Result<bool, CliError> {
        match self.raw(key) {
            None => Ok(false),
            Some("true" | "yes" | "1" | "on") => Ok(true),
            Some("false" | "no" | "0" | "off") => Ok(false),
            Some(v) => Err(CliError::Usage(format!("--{key} expects true or false, got `{v}`"))),
        }
    }

    pub fn opt_list(&self, key: &str) -> Result<Option<Vec<f64>>, CliError> {
        let Some(v) = self.raw(key) else {
            return Ok(None);
        };
        let xs = v
            .split(',')
            .map(|p| parse_f64(key, p.trim()))
            .collect::<Result<Vec<_>, _>>()?;
        if xs.is_empty() {
            return Err(CliError::Usage(format!("--{key} needs at least one value")));
        }
        Ok(Some(xs))
    }

    /// Settings that determine the computed result, for embedding in reports.
    pub fn recorded(&self) -> BTreeMap<&'static str, String> {
        self.values
            .iter()
            .filter(|(k, _)| !matches!(**k, "out" | "jobs" | "no-timing"))
            .map(|(k, v)| (*k, v.clone()))
            .collect()
    }
}

fn parse_f64(key: &str, v: &str) -> Result<f64, CliError> {
    match v.trim().parse::<f64>() {
        Ok(x) if x.is_finite() => Ok(x),
        _ => Err(CliError::Usage(format!("--{key} expects a finite number, got `{v}`"))),
    }
}

//! Declarative circuit-description files.
//!
//! A `.circuit` file is a stanza-oriented text format. Parameterized devices
//! need only a device line and parameters:
//!
//! ```text
//! # four-fold coincidence device, equal pump amplitudes
//! device = ghz
//! name = ghz_equal
//!
//! params {
//!   beta = 0.3
//! }
//! ```
//!
//! Custom devices spell out sources, elements, detection, and (optionally)
//! a target register:
//!
//! ```text
//! device = custom
//! name = bell
//! logical = 1 2
//!
//! params { b = 0.2 }
//!
//! single_pump { path = 1, beta1 = $b, beta2 = $b }
//! demux { in = 1, signal_out = 1, idler_out = 2 }
//! detect { 1: 1, 2: 1, exclusive: true }
//! target { 00: 1, 11: 1 }
//! ```
//!
//! Syntax rules: `#` starts a comment; entries are separated by commas or
//! newlines; `key = value` and `key: value` are interchangeable. Stanza
//! kinds are `params`, `single_pump`, `dual_pump`, `demux`, `adddrop`,
//! `coupler`, `filter`, `detect`, and `target`; the prefixed spellings
//! `source single_pump { … }` and `element demux { … }` are accepted and
//! normalized. Values are real numbers, complex pairs `[re, im]`, polar
//! forms `mag@phase`, pump-envelope blocks `{gamma = …, alpha0 = …, tau = …}`
//! (converted to a pair amplitude via [`compute_beta`]), or `$name`
//! references to declared parameters.
//!
//! Parsing gathers every syntax error in one pass before failing, so a file
//! with three typos reports all three lines at once.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use num_complex::Complex64 as C64;

use crate::circuits::{build_ghz_device, build_w_device, Circuit, Element};
use crate::elements::{CouplerParams, ModePredicate};
use crate::error::{Error, Result};
use crate::fock::Colour;
use crate::postselect::{BinRegisterState, DetectionPattern, PathRequirement};
use crate::sources::{
    compute_beta, dual_pump_source, single_pump_source, PumpEnvelope, SourceSpec,
};

/// A parameter value as written in a file, `--set` flag, or grid axis.
#[derive(Clone, Debug, PartialEq)]
pub enum ParamValue {
    /// A plain real number.
    Real(f64),
    /// A complex amplitude.
    Complex(C64),
    /// Gaussian pump-envelope parameters; converts to the pair amplitude
    /// β = −iγ·α₀²·τ·√π on demand.
    Envelope { gamma: C64, alpha0: f64, tau: f64 },
}

impl ParamValue {
    /// The value as a complex amplitude. Envelope values integrate the pump.
    pub fn as_complex(&self) -> Result<C64> {
        match *self {
            ParamValue::Real(x) => Ok(C64::new(x, 0.0)),
            ParamValue::Complex(z) => Ok(z),
            ParamValue::Envelope { gamma, alpha0, tau } => {
                compute_beta(&PumpEnvelope::gaussian(gamma, alpha0, tau)?)
            }
        }
    }

    /// The value as a real number; complex values must have zero imaginary
    /// part and envelopes are rejected.
    pub fn as_real(&self) -> Result<f64> {
        match *self {
            ParamValue::Real(x) => Ok(x),
            ParamValue::Complex(z) if z.im == 0.0 => Ok(z.re),
            ParamValue::Complex(z) => Err(value_error(format!(
                "expected a real number, got complex [{}, {}]",
                z.re, z.im
            ))),
            ParamValue::Envelope { .. } => {
                Err(value_error("expected a real number, got an envelope block"))
            }
        }
    }
}

impl fmt::Display for ParamValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            ParamValue::Real(x) => write!(f, "{x}"),
            ParamValue::Complex(z) => write!(f, "[{}, {}]", z.re, z.im),
            ParamValue::Envelope { gamma, alpha0, tau } => write!(
                f,
                "{{gamma = [{}, {}], alpha0 = {}, tau = {}}}",
                gamma.re, gamma.im, alpha0, tau
            ),
        }
    }
}

/// One `key = value` line, with the source line for error reports.
#[derive(Clone, Debug, PartialEq)]
pub struct Entry {
    pub key: String,
    pub value: String,
    pub line: usize,
}

/// One `kind { … }` block.
#[derive(Clone, Debug, PartialEq)]
pub struct Stanza {
    pub kind: String,
    pub entries: Vec<Entry>,
    pub line: usize,
}

/// A parsed circuit description: header entries plus stanzas, kept in file
/// order with raw value text so the file serializes back canonically.
#[derive(Clone, Debug, PartialEq)]
pub struct CircuitFile {
    name: String,
    device: String,
    top: Vec<Entry>,
    stanzas: Vec<Stanza>,
}

/// Stanza kinds after normalizing the `source`/`element` prefixed forms.
const STANZA_KINDS: [&str; 9] = [
    "params",
    "single_pump",
    "dual_pump",
    "demux",
    "adddrop",
    "coupler",
    "filter",
    "detect",
    "target",
];

const SOURCE_KINDS: [&str; 2] = ["single_pump", "dual_pump"];
const ELEMENT_KINDS: [&str; 4] = ["demux", "adddrop", "coupler", "filter"];
const TOP_KEYS: [&str; 4] = ["device", "name", "logical", "herald"];

impl CircuitFile {
    /// Read and parse a circuit file; the file stem is the default circuit
    /// name.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::Parse {
            line: 0,
            msg: format!("cannot read {}: {e}", path.display()),
        })?;
        let stem = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "circuit".into());
        CircuitFile::parse(&text, &stem)
    }

    /// Parse circuit-description text. `fallback_name` names the circuit
    /// when the file has no `name =` line. All syntax errors in the text are
    /// collected and reported together.
    pub fn parse(text: &str, fallback_name: &str) -> Result<Self> {
        let mut scanner = Scanner::new(text);
        let mut errors: Vec<(usize, String)> = Vec::new();
        let mut top: Vec<Entry> = Vec::new();
        let mut stanzas: Vec<Stanza> = Vec::new();

        loop {
            scanner.skip_whitespace();
            let Some(c) = scanner.peek() else { break };
            let line = scanner.line;
            if !is_word_char(c) {
                errors.push((line, format!("unexpected character {c:?}")));
                scanner.skip_to_newline();
                continue;
            }
            let word = scanner.read_word();
            scanner.skip_inline_whitespace();
            match scanner.peek() {
                Some('=') | Some(':') => {
                    scanner.bump();
                    let value = scanner.read_to_line_end();
                    if TOP_KEYS.contains(&word.as_str()) {
                        top.push(Entry {
                            key: word,
                            value,
                            line,
                        });
                    } else {
                        errors.push((
                            line,
                            format!(
                                "unknown header key `{word}` (expected one of: {})",
                                TOP_KEYS.join(", ")
                            ),
                        ));
                    }
                }
                Some('{') => {
                    scanner.bump();
                    scan_stanza(&mut scanner, word, None, line, &mut stanzas, &mut errors);
                }
                Some(c2) if is_word_char(c2) => {
                    let sub = scanner.read_word();
                    scanner.skip_inline_whitespace();
                    if scanner.peek() == Some('{') {
                        scanner.bump();
                        scan_stanza(
                            &mut scanner,
                            word,
                            Some(sub),
                            line,
                            &mut stanzas,
                            &mut errors,
                        );
                    } else {
                        errors.push((line, format!("expected `{{` after `{word} {sub}`")));
                        scanner.skip_to_newline();
                    }
                }
                _ => {
                    errors.push((line, format!("expected `=`, `:`, or `{{` after `{word}`")));
                    scanner.skip_to_newline();
                }
            }
        }

        check_duplicate_keys(&top, "header", &mut errors);
        for stanza in &stanzas {
            check_duplicate_keys(&stanza.entries, &stanza.kind, &mut errors);
        }

        let device = match top.iter().find(|e| e.key == "device") {
            Some(e) if matches!(e.value.as_str(), "ghz" | "w" | "custom") => e.value.clone(),
            Some(e) => {
                errors.push((
                    e.line,
                    format!("unknown device `{}` (expected ghz, w, or custom)", e.value),
                ));
                String::new()
            }
            None => {
                errors.push((0, "file needs a `device = ghz | w | custom` line".into()));
                String::new()
            }
        };

        if !errors.is_empty() {
            return Err(collect_errors(errors));
        }

        let name = match top.iter().find(|e| e.key == "name") {
            Some(e) => e.value.clone(),
            None => {
                // Canonicalize: serialized output always carries the name.
                top.insert(
                    0,
                    Entry {
                        key: "name".into(),
                        value: fallback_name.to_string(),
                        line: 0,
                    },
                );
                fallback_name.to_string()
            }
        };

        Ok(CircuitFile {
            name,
            device,
            top,
            stanzas,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// `ghz`, `w`, or `custom`.
    pub fn device(&self) -> &str {
        &self.device
    }

    /// Names declared in `params` stanzas, in declaration order.
    pub fn declared_parameters(&self) -> Vec<String> {
        self.stanzas
            .iter()
            .filter(|s| s.kind == "params")
            .flat_map(|s| s.entries.iter().map(|e| e.key.clone()))
            .collect()
    }

    /// True when `name` can be set on this file: either declared in a
    /// `params` stanza or recognized by the device builder.
    pub fn accepts_parameter(&self, name: &str) -> bool {
        if matches!(name, "rep_rate" | "max_pairs") {
            return true;
        }
        if self.declared_parameters().iter().any(|p| p == name) {
            return true;
        }
        match self.device.as_str() {
            "ghz" => matches!(name, "beta" | "beta1" | "beta2" | "beta3" | "beta4"),
            "w" => matches!(
                name,
                "beta"
                    | "beta1"
                    | "beta2"
                    | "beta_ratio"
                    | "theta1"
                    | "theta2"
                    | "T1"
                    | "R1"
                    | "T2"
                    | "R2"
            ),
            _ => false,
        }
    }

    /// The parameter map used for instantiation: declared values overlaid
    /// with `overrides`. Override names must be declared or recognized by
    /// the device.
    pub fn resolved_parameters(
        &self,
        overrides: &BTreeMap<String, ParamValue>,
    ) -> Result<BTreeMap<String, ParamValue>> {
        let mut params = BTreeMap::new();
        for stanza in self.stanzas.iter().filter(|s| s.kind == "params") {
            for entry in &stanza.entries {
                let value = parse_value(&entry.value).map_err(|e| at_line(entry.line, e))?;
                params.insert(entry.key.clone(), value);
            }
        }
        for (name, value) in overrides {
            if !self.accepts_parameter(name) {
                return Err(Error::UnknownParameter { name: name.clone() });
            }
            params.insert(name.clone(), value.clone());
        }
        Ok(params)
    }

    /// Build the described circuit, with `overrides` replacing declared
    /// parameter values.
    pub fn instantiate(&self, overrides: &BTreeMap<String, ParamValue>) -> Result<Circuit> {
        let params = self.resolved_parameters(overrides)?;
        let mut circuit = match self.device.as_str() {
            "ghz" => self.build_ghz(&params)?,
            "w" => self.build_w(&params)?,
            _ => self.build_custom(&params)?,
        };
        circuit = circuit.with_name(self.name.clone());
        if let Some(value) = params.get("rep_rate") {
            let rate = value.as_real().map_err(|e| in_params("rep_rate", e))?;
            if !rate.is_finite() || rate <= 0.0 {
                return Err(Error::Validation {
                    stanza: "params".into(),
                    msg: format!("rep_rate = {rate} must be finite and positive"),
                });
            }
            circuit = circuit.with_rep_rate(rate);
        }
        if let Some(value) = params.get("max_pairs") {
            let n = value.as_real().map_err(|e| in_params("max_pairs", e))?;
            if n != 1.0 && n != 2.0 {
                return Err(Error::Validation {
                    stanza: "params".into(),
                    msg: format!("max_pairs = {n} must be 1 or 2"),
                });
            }
            circuit = circuit.with_max_pairs(n as u32);
        }
        Ok(circuit)
    }

    /// Canonical text form: header lines, then stanzas in file order.
    /// Parsing the output reproduces this file.
    pub fn serialize(&self) -> String {
        let mut out = String::new();
        for entry in &self.top {
            out.push_str(&format!("{} = {}\n", entry.key, entry.value));
        }
        for stanza in &self.stanzas {
            out.push('\n');
            out.push_str(&stanza.kind);
            out.push_str(" {\n");
            for entry in &stanza.entries {
                let sep = if matches!(stanza.kind.as_str(), "detect" | "target") {
                    ":"
                } else {
                    " ="
                };
                out.push_str(&format!("  {}{sep} {}\n", entry.key, sep_value(entry)));
            }
            out.push_str("}\n");
        }
        out
    }

    /// Parameterized devices must not also describe structure.
    fn forbid_structure(&self) -> Result<()> {
        if let Some(stanza) = self.stanzas.iter().find(|s| s.kind != "params") {
            return Err(Error::Validation {
                stanza: stanza_label(stanza),
                msg: format!(
                    "device `{}` is fully parameterized; only params stanzas apply",
                    self.device
                ),
            });
        }
        if let Some(entry) = self
            .top
            .iter()
            .find(|e| matches!(e.key.as_str(), "logical" | "herald"))
        {
            return Err(Error::Validation {
                stanza: "header".into(),
                msg: format!(
                    "device `{}` fixes its {} paths; remove the header line",
                    self.device, entry.key
                ),
            });
        }
        Ok(())
    }

    fn build_ghz(&self, params: &BTreeMap<String, ParamValue>) -> Result<Circuit> {
        self.forbid_structure()?;
        let mut betas = [C64::new(0.0, 0.0); 4];
        for (slot, key) in betas.iter_mut().zip(["beta1", "beta2", "beta3", "beta4"]) {
            let value = params
                .get(key)
                .or_else(|| params.get("beta"))
                .ok_or_else(|| Error::Validation {
                    stanza: "params".into(),
                    msg: format!("device ghz needs `{key}` (or a shared `beta`)"),
                })?;
            *slot = value.as_complex().map_err(|e| in_params(key, e))?;
        }
        build_ghz_device(betas)
    }

    fn build_w(&self, params: &BTreeMap<String, ParamValue>) -> Result<Circuit> {
        self.forbid_structure()?;
        let beta2 = params
            .get("beta2")
            .or_else(|| params.get("beta"))
            .ok_or_else(|| Error::Validation {
                stanza: "params".into(),
                msg: "device w needs `beta2` (or a shared `beta`)".into(),
            })?
            .as_complex()
            .map_err(|e| in_params("beta2", e))?;
        let beta1 = match params.get("beta_ratio") {
            Some(ratio) => ratio.as_complex().map_err(|e| in_params("beta_ratio", e))? * beta2,
            None => params
                .get("beta1")
                .or_else(|| params.get("beta"))
                .ok_or_else(|| Error::Validation {
                    stanza: "params".into(),
                    msg: "device w needs `beta1`, `beta_ratio`, or a shared `beta`".into(),
                })?
                .as_complex()
                .map_err(|e| in_params("beta1", e))?,
        };
        let coupler1 = coupler_from_params(params, "theta1", "T1", "R1")?;
        let coupler2 = coupler_from_params(params, "theta2", "T2", "R2")?;
        build_w_device(beta1, beta2, coupler1, coupler2)
    }

    fn build_custom(&self, params: &BTreeMap<String, ParamValue>) -> Result<Circuit> {
        let mut sources: Vec<(SourceSpec, u32)> = Vec::new();
        let mut elements: Vec<Element> = Vec::new();
        let mut detection: Option<(Vec<(u32, PathRequirement)>, bool)> = None;
        let mut target_stanza: Option<&Stanza> = None;

        for stanza in &self.stanzas {
            match stanza.kind.as_str() {
                "params" => {}
                "single_pump" | "dual_pump" => {
                    sources.push(build_source(stanza, params)?);
                }
                "demux" | "adddrop" | "coupler" | "filter" => {
                    elements.push(build_element(stanza, params)?);
                }
                "detect" => {
                    if detection.is_some() {
                        return Err(Error::Validation {
                            stanza: stanza_label(stanza),
                            msg: "a circuit has exactly one detect stanza".into(),
                        });
                    }
                    detection = Some(build_detection(stanza)?);
                }
                "target" => target_stanza = Some(stanza),
                other => {
                    // Scanner admits only known kinds; keep a clear message
                    // in case that ever changes.
                    return Err(Error::Validation {
                        stanza: stanza_label(stanza),
                        msg: format!("unsupported stanza `{other}`"),
                    });
                }
            }
        }

        let logical = self
            .header_paths("logical")?
            .ok_or_else(|| Error::Validation {
                stanza: "header".into(),
                msg: "custom device needs `logical = <path list>`".into(),
            })?;
        let herald = self.header_paths("herald")?.unwrap_or_default();
        let (requirements, exclusive) = detection.ok_or_else(|| Error::Validation {
            stanza: "detect".into(),
            msg: "custom device needs a detect stanza".into(),
        })?;
        let pattern = DetectionPattern::new(requirements, exclusive)?;

        let mut circuit = Circuit::new(
            self.name.clone(),
            sources,
            elements,
            pattern,
            logical.clone(),
            herald,
        )?;
        if let Some(stanza) = target_stanza {
            circuit = circuit.with_target(build_target(stanza, params, logical)?);
        }
        Ok(circuit)
    }

    fn header_paths(&self, key: &str) -> Result<Option<Vec<u32>>> {
        let Some(entry) = self.top.iter().find(|e| e.key == key) else {
            return Ok(None);
        };
        let paths: Vec<u32> = entry
            .value
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|s| !s.is_empty())
            .map(|s| {
                s.parse::<u32>().map_err(|_| Error::Parse {
                    line: entry.line,
                    msg: format!("`{key}` takes a list of path numbers, got `{s}`"),
                })
            })
            .collect::<Result<_>>()?;
        if paths.is_empty() {
            return Err(Error::Parse {
                line: entry.line,
                msg: format!("`{key}` lists no paths"),
            });
        }
        Ok(Some(paths))
    }
}

/// Detect/target values keep their raw spacing except for a canonical
/// single space around the `@` constraint marker.
fn sep_value(entry: &Entry) -> String {
    entry.value.split_whitespace().collect::<Vec<_>>().join(" ")
}

fn scan_stanza(
    scanner: &mut Scanner,
    word: String,
    sub: Option<String>,
    line: usize,
    stanzas: &mut Vec<Stanza>,
    errors: &mut Vec<(usize, String)>,
) {
    let kind = match normalize_kind(&word, sub.as_deref()) {
        Ok(kind) => kind,
        Err(msg) => {
            errors.push((line, msg));
            // Still consume the block so scanning can continue beyond it.
            let _ = scanner.read_block(&word, line, errors);
            return;
        }
    };
    if let Some(body) = scanner.read_block(&kind, line, errors) {
        let entries = split_entries(&body.text, body.first_line, &kind, errors);
        stanzas.push(Stanza {
            kind,
            entries,
            line,
        });
    }
}

fn normalize_kind(word: &str, sub: Option<&str>) -> std::result::Result<String, String> {
    match (word, sub) {
        ("source", Some(s)) if SOURCE_KINDS.contains(&s) => Ok(s.to_string()),
        ("source", Some(s)) => Err(format!(
            "unknown source kind `{s}` (expected single_pump or dual_pump)"
        )),
        ("source", None) => Err("source stanza needs a kind: `source single_pump { … }`".into()),
        ("element", Some(s)) if ELEMENT_KINDS.contains(&s) => Ok(s.to_string()),
        ("element", Some(s)) => Err(format!(
            "unknown element kind `{s}` (expected demux, adddrop, coupler, or filter)"
        )),
        ("element", None) => Err("element stanza needs a kind: `element demux { … }`".into()),
        (k, None) if STANZA_KINDS.contains(&k) => Ok(k.to_string()),
        (k, Some(s)) => Err(format!("stanza `{k}` takes no sub-kind (got `{s}`)")),
        (k, None) => Err(format!("unknown stanza `{k}`")),
    }
}

fn check_duplicate_keys(entries: &[Entry], context: &str, errors: &mut Vec<(usize, String)>) {
    let mut seen: BTreeMap<&str, usize> = BTreeMap::new();
    for entry in entries {
        if let Some(first) = seen.insert(entry.key.as_str(), entry.line) {
            errors.push((
                entry.line,
                format!(
                    "duplicate key `{}` in {context} (first given on line {first})",
                    entry.key
                ),
            ));
        }
    }
}

fn collect_errors(errors: Vec<(usize, String)>) -> Error {
    let first = errors.first().map(|(l, _)| *l).unwrap_or(0);
    let msg = errors
        .iter()
        .map(|(l, m)| format!("line {l}: {m}"))
        .collect::<Vec<_>>()
        .join("; ");
    Error::Parse { line: first, msg }
}

fn stanza_label(stanza: &Stanza) -> String {
    format!("{} (line {})", stanza.kind, stanza.line)
}

fn value_error(msg: impl Into<String>) -> Error {
    Error::Validation {
        stanza: "value".into(),
        msg: msg.into(),
    }
}

/// Attach a line number to a bare value error.
fn at_line(line: usize, err: Error) -> Error {
    match err {
        Error::Validation { stanza, msg } if stanza == "value" => Error::Parse { line, msg },
        other => other,
    }
}

/// Attach a parameter name to a bare value error.
fn in_params(name: &str, err: Error) -> Error {
    match err {
        Error::Validation { stanza, msg } if stanza == "value" => Error::Validation {
            stanza: "params".into(),
            msg: format!("{name}: {msg}"),
        },
        other => other,
    }
}

fn is_word_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_' || c == '.' || c == '-' || c == '+'
}

/// Character scanner over comment-stripped text with line tracking.
struct Scanner {
    chars: Vec<char>,
    pos: usize,
    line: usize,
}

struct Block {
    text: String,
    first_line: usize,
}

impl Scanner {
    fn new(text: &str) -> Self {
        // Strip comments up front so neither values nor blocks see them.
        let clean: String = text
            .lines()
            .map(|l| l.split('#').next().unwrap_or(""))
            .collect::<Vec<_>>()
            .join("\n");
        Scanner {
            chars: clean.chars().collect(),
            pos: 0,
            line: 1,
        }
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += 1;
        if c == '\n' {
            self.line += 1;
        }
        Some(c)
    }

    fn skip_whitespace(&mut self) {
        while self.peek().is_some_and(char::is_whitespace) {
            self.bump();
        }
    }

    fn skip_inline_whitespace(&mut self) {
        while self.peek().is_some_and(|c| c.is_whitespace() && c != '\n') {
            self.bump();
        }
    }

    fn skip_to_newline(&mut self) {
        while let Some(c) = self.bump() {
            if c == '\n' {
                break;
            }
        }
    }

    fn read_word(&mut self) -> String {
        let mut word = String::new();
        while self.peek().is_some_and(is_word_char) {
            word.push(self.bump().unwrap());
        }
        word
    }

    /// Raw text up to the end of the line, letting brackets span lines.
    fn read_to_line_end(&mut self) -> String {
        let mut out = String::new();
        let mut depth = 0i32;
        while let Some(c) = self.peek() {
            match c {
                '\n' if depth == 0 => break,
                '[' | '{' => depth += 1,
                ']' | '}' => depth -= 1,
                _ => {}
            }
            out.push(self.bump().unwrap());
        }
        out.trim().to_string()
    }

    /// Raw text of a `{ … }` block, assuming the opening brace is consumed.
    /// Returns None (and records an error) if the file ends first.
    fn read_block(
        &mut self,
        kind: &str,
        open_line: usize,
        errors: &mut Vec<(usize, String)>,
    ) -> Option<Block> {
        let first_line = self.line;
        let mut text = String::new();
        let mut depth = 1i32;
        while let Some(c) = self.peek() {
            match c {
                '{' | '[' => depth += 1,
                '}' | ']' => {
                    depth -= 1;
                    if depth == 0 {
                        self.bump();
                        return Some(Block { text, first_line });
                    }
                }
                _ => {}
            }
            text.push(self.bump().unwrap());
        }
        errors.push((open_line, format!("unterminated `{kind}` stanza")));
        None
    }
}

/// Split a stanza body into entries at top-level commas and newlines.
fn split_entries(
    body: &str,
    start_line: usize,
    kind: &str,
    errors: &mut Vec<(usize, String)>,
) -> Vec<Entry> {
    let mut entries = Vec::new();
    let mut segment = String::new();
    let mut segment_line = start_line;
    let mut line = start_line;
    let mut fresh = true;
    let mut depth = 0i32;

    let mut flush =
        |segment: &mut String, segment_line: usize, errors: &mut Vec<(usize, String)>| {
            let text = segment.trim();
            if !text.is_empty() {
                match split_key_value(text) {
                    Some((key, value)) if !key.is_empty() && key.chars().all(is_word_char) => {
                        entries.push(Entry {
                            key,
                            value,
                            line: segment_line,
                        });
                    }
                    _ => errors.push((
                        segment_line,
                        format!("expected `key = value` in `{kind}` stanza, got `{text}`"),
                    )),
                }
            }
            segment.clear();
        };

    for c in body.chars() {
        match c {
            '\n' => {
                line += 1;
                if depth == 0 {
                    flush(&mut segment, segment_line, errors);
                    fresh = true;
                    continue;
                }
            }
            ',' if depth == 0 => {
                flush(&mut segment, segment_line, errors);
                fresh = true;
                continue;
            }
            '[' | '{' => depth += 1,
            ']' | '}' => depth -= 1,
            _ => {}
        }
        if fresh && !c.is_whitespace() {
            segment_line = line;
            fresh = false;
        }
        segment.push(c);
    }
    flush(&mut segment, segment_line, errors);
    entries
}

/// Split `key = value` or `key: value` at the first top-level separator.
fn split_key_value(segment: &str) -> Option<(String, String)> {
    let mut depth = 0i32;
    for (i, c) in segment.char_indices() {
        match c {
            '[' | '{' => depth += 1,
            ']' | '}' => depth -= 1,
            '=' | ':' if depth == 0 => {
                return Some((
                    segment[..i].trim().to_string(),
                    segment[i + 1..].trim().to_string(),
                ));
            }
            _ => {}
        }
    }
    None
}

/// Split at a separator character, ignoring separators inside brackets.
fn split_top_level(text: &str, separator: char) -> Vec<&str> {
    let mut parts = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (i, c) in text.char_indices() {
        match c {
            '[' | '{' => depth += 1,
            ']' | '}' => depth -= 1,
            c if c == separator && depth == 0 => {
                parts.push(&text[start..i]);
                start = i + c.len_utf8();
            }
            _ => {}
        }
    }
    parts.push(&text[start..]);
    parts
}

/// Parse one literal value: real, `[re, im]`, `mag@phase`, or an envelope
/// block. `$name` references are resolved by the caller.
pub fn parse_value(text: &str) -> Result<ParamValue> {
    let t = text.trim();
    if t.is_empty() {
        return Err(value_error("empty value"));
    }
    if let Some(rest) = t.strip_prefix('[') {
        let inner = rest
            .strip_suffix(']')
            .ok_or_else(|| value_error(format!("unterminated complex literal `{t}`")))?;
        let parts = split_top_level(inner, ',');
        if parts.len() != 2 {
            return Err(value_error(format!(
                "complex literal needs two components `[re, im]`, got `{t}`"
            )));
        }
        return Ok(ParamValue::Complex(C64::new(
            parse_real(parts[0])?,
            parse_real(parts[1])?,
        )));
    }
    if t.starts_with('{') || t.starts_with("envelope") {
        return parse_envelope(t);
    }
    if let Some((mag, phase)) = t.split_once('@') {
        return Ok(ParamValue::Complex(C64::from_polar(
            parse_real(mag)?,
            parse_real(phase)?,
        )));
    }
    Ok(ParamValue::Real(parse_real(t)?))
}

fn parse_real(text: &str) -> Result<f64> {
    let t = text.trim();
    let x: f64 = t
        .parse()
        .map_err(|_| value_error(format!("`{t}` is not a number")))?;
    if !x.is_finite() {
        return Err(value_error(format!("`{t}` is not finite")));
    }
    Ok(x)
}

fn parse_envelope(text: &str) -> Result<ParamValue> {
    let body = text.strip_prefix("envelope").unwrap_or(text).trim_start();
    let body = body
        .strip_prefix('{')
        .and_then(|b| b.strip_suffix('}'))
        .ok_or_else(|| value_error(format!("malformed envelope block `{text}`")))?;
    let mut gamma = None;
    let mut alpha0 = None;
    let mut tau = None;
    for part in split_top_level(body, ',') {
        let segment = part.trim();
        if segment.is_empty() {
            continue;
        }
        let (key, value) = split_key_value(segment).ok_or_else(|| {
            value_error(format!(
                "expected `key = value` in envelope, got `{segment}`"
            ))
        })?;
        match key.as_str() {
            "gamma" => {
                gamma = Some(match parse_value(&value)? {
                    ParamValue::Real(x) => C64::new(x, 0.0),
                    ParamValue::Complex(z) => z,
                    ParamValue::Envelope { .. } => {
                        return Err(value_error("gamma cannot itself be an envelope"));
                    }
                })
            }
            "alpha0" => alpha0 = Some(parse_real(&value)?),
            "tau" => tau = Some(parse_real(&value)?),
            other => {
                return Err(value_error(format!(
                    "unknown envelope key `{other}` (expected gamma, alpha0, tau)"
                )));
            }
        }
    }
    match (gamma, alpha0, tau) {
        (Some(gamma), Some(alpha0), Some(tau)) => Ok(ParamValue::Envelope { gamma, alpha0, tau }),
        _ => Err(value_error("envelope needs gamma, alpha0, and tau")),
    }
}

/// Parse a `--set NAME=VALUE` override.
pub fn parse_override(text: &str) -> Result<(String, ParamValue)> {
    let (name, value) = split_key_value(text).ok_or_else(|| Error::Validation {
        stanza: "override".into(),
        msg: format!("expected NAME=VALUE, got `{text}`"),
    })?;
    let value = parse_value(&value).map_err(|e| in_params(&name, e))?;
    Ok((name, value))
}

/// Parse a `--grid NAME=V1,V2,...` axis.
pub fn parse_grid_axis(text: &str) -> Result<(String, Vec<ParamValue>)> {
    let (name, values_text) = split_key_value(text).ok_or_else(|| Error::Validation {
        stanza: "grid".into(),
        msg: format!("expected NAME=V1,V2,..., got `{text}`"),
    })?;
    let values: Vec<ParamValue> = split_top_level(&values_text, ',')
        .into_iter()
        .map(|v| parse_value(v).map_err(|e| in_params(&name, e)))
        .collect::<Result<_>>()?;
    if values.is_empty() {
        return Err(Error::Validation {
            stanza: "grid".into(),
            msg: format!("grid axis `{name}` lists no values"),
        });
    }
    Ok((name, values))
}

/// Resolve an entry value: `$name` looks up a declared parameter, anything
/// else parses as a literal.
fn resolve(entry: &Entry, params: &BTreeMap<String, ParamValue>) -> Result<ParamValue> {
    let t = entry.value.trim();
    if let Some(name) = t.strip_prefix('$') {
        return params
            .get(name)
            .cloned()
            .ok_or_else(|| Error::UnknownParameter { name: name.into() });
    }
    parse_value(t).map_err(|e| at_line(entry.line, e))
}

/// Keyed access to a stanza's entries with unknown-key detection.
struct Fields<'a> {
    label: String,
    map: BTreeMap<&'a str, &'a Entry>,
}

impl<'a> Fields<'a> {
    fn new(stanza: &'a Stanza) -> Self {
        Fields {
            label: stanza_label(stanza),
            map: stanza.entries.iter().map(|e| (e.key.as_str(), e)).collect(),
        }
    }

    fn take(&mut self, key: &str) -> Option<&'a Entry> {
        self.map.remove(key)
    }

    fn require(&mut self, key: &str) -> Result<&'a Entry> {
        self.take(key).ok_or_else(|| Error::Validation {
            stanza: self.label.clone(),
            msg: format!("missing required key `{key}`"),
        })
    }

    fn finish(self) -> Result<()> {
        if let Some(key) = self.map.keys().next() {
            return Err(Error::Validation {
                stanza: self.label,
                msg: format!("unknown key `{key}`"),
            });
        }
        Ok(())
    }
}

fn entry_u32(entry: &Entry) -> Result<u32> {
    entry.value.trim().parse().map_err(|_| Error::Parse {
        line: entry.line,
        msg: format!("`{}` takes a path number, got `{}`", entry.key, entry.value),
    })
}

fn entry_colour(entry: &Entry) -> Result<Colour> {
    match entry.value.trim() {
        "S" => Ok(Colour::Signal),
        "I" => Ok(Colour::Idler),
        other => Err(Error::Parse {
            line: entry.line,
            msg: format!("`{}` takes S or I, got `{other}`", entry.key),
        }),
    }
}

fn entry_bool(entry: &Entry) -> Result<bool> {
    match entry.value.trim() {
        "true" => Ok(true),
        "false" => Ok(false),
        other => Err(Error::Parse {
            line: entry.line,
            msg: format!("`{}` takes true or false, got `{other}`", entry.key),
        }),
    }
}

fn build_source(
    stanza: &Stanza,
    params: &BTreeMap<String, ParamValue>,
) -> Result<(SourceSpec, u32)> {
    let mut fields = Fields::new(stanza);
    let path = entry_u32(fields.require("path")?)?;
    let beta1 = resolve(fields.require("beta1")?, params)?.as_complex()?;
    let beta2 = resolve(fields.require("beta2")?, params)?.as_complex()?;
    fields.finish()?;
    let spec = match stanza.kind.as_str() {
        "single_pump" => single_pump_source(beta1, beta2)?,
        _ => dual_pump_source(beta1, beta2)?,
    };
    Ok((spec, path))
}

fn optional_predicate(fields: &mut Fields<'_>) -> Result<ModePredicate> {
    let colour = fields.take("colour").map(entry_colour).transpose()?;
    let bin = fields.take("bin").map(entry_u32).transpose()?;
    Ok(ModePredicate { colour, bin })
}

fn build_element(stanza: &Stanza, params: &BTreeMap<String, ParamValue>) -> Result<Element> {
    let mut fields = Fields::new(stanza);
    let element = match stanza.kind.as_str() {
        "demux" => Element::Demux {
            input: entry_u32(fields.require("in")?)?,
            signal_out: entry_u32(fields.require("signal_out")?)?,
            idler_out: entry_u32(fields.require("idler_out")?)?,
        },
        "adddrop" => Element::AddDropSwap {
            path_a: entry_u32(fields.require("path_a")?)?,
            path_b: entry_u32(fields.require("path_b")?)?,
            pred: optional_predicate(&mut fields)?,
        },
        "coupler" => {
            let path_a = entry_u32(fields.require("path_a")?)?;
            let path_b = entry_u32(fields.require("path_b")?)?;
            let theta = fields.take("theta");
            let t = fields.take("T");
            let r = fields.take("R");
            let params_cp = coupler_from_entries(&fields.label, theta, t, r, params)?;
            Element::Coupler {
                path_a,
                path_b,
                params: params_cp,
            }
        }
        _ => Element::Filter {
            path: entry_u32(fields.require("path")?)?,
            pred: optional_predicate(&mut fields)?,
        },
    };
    fields.finish()?;
    Ok(element)
}

fn coupler_from_entries(
    label: &str,
    theta: Option<&Entry>,
    t: Option<&Entry>,
    r: Option<&Entry>,
    params: &BTreeMap<String, ParamValue>,
) -> Result<CouplerParams> {
    match (theta, t, r) {
        (Some(_), Some(_), _) | (Some(_), _, Some(_)) => Err(Error::Validation {
            stanza: label.to_string(),
            msg: "give either `theta` or the `T`/`R` pair, not both".into(),
        }),
        (Some(theta), None, None) => Ok(CouplerParams::from_theta(
            resolve(theta, params)?.as_real()?,
        )),
        (None, Some(t), Some(r)) => CouplerParams::new(
            resolve(t, params)?.as_complex()?,
            resolve(r, params)?.as_complex()?,
        ),
        (None, None, None) => Ok(CouplerParams::fifty_fifty()),
        _ => Err(Error::Validation {
            stanza: label.to_string(),
            msg: "`T` and `R` come as a pair".into(),
        }),
    }
}

/// Same selection logic for the parameterized W device: `theta` shorthand
/// or an explicit `T`/`R` pair, defaulting to the 50-50 coupler.
fn coupler_from_params(
    params: &BTreeMap<String, ParamValue>,
    theta_key: &str,
    t_key: &str,
    r_key: &str,
) -> Result<CouplerParams> {
    let theta = params.get(theta_key);
    let t = params.get(t_key);
    let r = params.get(r_key);
    match (theta, t, r) {
        (Some(_), Some(_), _) | (Some(_), _, Some(_)) => Err(Error::Validation {
            stanza: "params".into(),
            msg: format!("give either `{theta_key}` or the `{t_key}`/`{r_key}` pair, not both"),
        }),
        (Some(theta), None, None) => Ok(CouplerParams::from_theta(
            theta.as_real().map_err(|e| in_params(theta_key, e))?,
        )),
        (None, Some(t), Some(r)) => CouplerParams::new(
            t.as_complex().map_err(|e| in_params(t_key, e))?,
            r.as_complex().map_err(|e| in_params(r_key, e))?,
        ),
        (None, None, None) => Ok(CouplerParams::fifty_fifty()),
        _ => Err(Error::Validation {
            stanza: "params".into(),
            msg: format!("`{t_key}` and `{r_key}` come as a pair"),
        }),
    }
}

/// Detect entries read `path: count [@ colour bin]` plus the exclusivity
/// flag.
fn build_detection(stanza: &Stanza) -> Result<(Vec<(u32, PathRequirement)>, bool)> {
    let mut requirements = Vec::new();
    let mut exclusive = None;
    for entry in &stanza.entries {
        if entry.key == "exclusive" {
            exclusive = Some(entry_bool(entry)?);
            continue;
        }
        let path: u32 = entry.key.parse().map_err(|_| Error::Parse {
            line: entry.line,
            msg: format!("detect keys are path numbers, got `{}`", entry.key),
        })?;
        let (count_text, constraint_text) = match entry.value.split_once('@') {
            Some((c, k)) => (c, Some(k)),
            None => (entry.value.as_str(), None),
        };
        let count: u32 = count_text.trim().parse().map_err(|_| Error::Parse {
            line: entry.line,
            msg: format!("detector count must be an integer, got `{count_text}`"),
        })?;
        let constraint = constraint_text
            .map(|text| parse_constraint(text, entry.line))
            .transpose()?;
        requirements.push((path, PathRequirement { count, constraint }));
    }
    let exclusive = exclusive.ok_or_else(|| Error::Validation {
        stanza: stanza_label(stanza),
        msg: "detect stanza needs `exclusive: true | false`".into(),
    })?;
    Ok((requirements, exclusive))
}

/// `@ S 1` constrains colour and bin; either token alone is accepted.
fn parse_constraint(text: &str, line: usize) -> Result<ModePredicate> {
    let mut pred = ModePredicate::any();
    for token in text.split_whitespace() {
        match token {
            "S" => pred.colour = Some(Colour::Signal),
            "I" => pred.colour = Some(Colour::Idler),
            t => match t.parse::<u32>() {
                Ok(bin) => pred.bin = Some(bin),
                Err(_) => {
                    return Err(Error::Parse {
                        line,
                        msg: format!("constraint tokens are S, I, or a bin number, got `{t}`"),
                    });
                }
            },
        }
    }
    if pred == ModePredicate::any() {
        return Err(Error::Parse {
            line,
            msg: "`@` constraint lists no colour or bin".into(),
        });
    }
    Ok(pred)
}

/// Target entries read `binstring: amplitude`; amplitudes are normalized.
fn build_target(
    stanza: &Stanza,
    params: &BTreeMap<String, ParamValue>,
    logical: Vec<u32>,
) -> Result<BinRegisterState> {
    let mut amplitudes = Vec::new();
    for entry in &stanza.entries {
        let bins: Vec<u32> = entry
            .key
            .chars()
            .map(|c| {
                c.to_digit(10).ok_or_else(|| Error::Parse {
                    line: entry.line,
                    msg: format!(
                        "target keys are bin strings like `010`, got `{}`",
                        entry.key
                    ),
                })
            })
            .collect::<Result<_>>()?;
        let amp = resolve(entry, params)?.as_complex()?;
        amplitudes.push((bins, amp));
    }
    BinRegisterState::normalized(logical, amplitudes)
}

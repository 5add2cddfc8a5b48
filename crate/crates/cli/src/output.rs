//! Output artifacts: pretty JSON with the configuration echoed, or CSV rows
//! for plotting.

use std::fmt::Write as _;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::ValueEnum;
use hjnet::critical::ConditionDReport;
use hjnet::{AubryItem, AubryStructure, CriticalData, FieldOnNetwork, Instance, PathCertificate};
use serde::Serialize;
use serde_json::{json, Value};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

pub struct Sink<'a> {
    inst: &'a Instance,
    path: Option<PathBuf>,
    format: Format,
}

impl<'a> Sink<'a> {
    pub fn new(inst: &'a Instance, path: Option<PathBuf>, format: Format) -> Self {
        Sink { inst, path, format }
    }

    fn config(&self) -> Value {
        serde_json::to_value(&self.inst.config).expect("config serializes")
    }

    fn write(&self, text: &str) -> Result<()> {
        match &self.path {
            Some(path) => std::fs::write(path, text).with_context(|| format!("cannot write {}", path.display())),
            None => {
                print!("{text}");
                Ok(())
            }
        }
    }

    fn csv_header(&self) -> String {
        format!("# config: {}\n", self.config())
    }

    /// JSON object output with a `config` member; CSV is not offered for
    /// report outputs.
    pub fn json(&self, value: impl Serialize) -> Result<()> {
        if self.format == Format::Csv {
            bail!("this subcommand only produces JSON");
        }
        let mut value = serde_json::to_value(value)?;
        if let Value::Object(map) = &mut value {
            map.insert("config".into(), self.config());
        }
        self.write(&(serde_json::to_string_pretty(&value)? + "\n"))
    }

    pub fn critical(&self, crit: &CriticalData) -> Result<()> {
        match self.format {
            Format::Json => self.json(crit),
            Format::Csv => {
                let mut out = self.csv_header();
                writeln!(out, "# c: {}\n# a0: {}\nlevel,negative_cycle", crit.c, crit.a0)?;
                for step in &crit.history {
                    writeln!(out, "{},{}", step.level, step.negative_cycle)?;
                }
                self.write(&out)
            }
        }
    }

    pub fn aubry(&self, aubry: &AubryStructure, condition_d: &ConditionDReport) -> Result<()> {
        match self.format {
            Format::Json => {
                let mut value = serde_json::to_value(aubry)?;
                value["condition_d"] = serde_json::to_value(condition_d)?;
                self.json(value)
            }
            Format::Csv => {
                let mut out = self.csv_header();
                out.push_str("class,origin,kind,name,s1,s2\n");
                let origin = |o| serde_json::to_value(o).ok().and_then(|v| v.as_str().map(str::to_owned)).unwrap_or_default();
                for class in &aubry.classes {
                    for item in &class.items {
                        match item {
                            AubryItem::Vertex { vertex, .. } => writeln!(out, "{},{},vertex,{vertex},,", class.id, origin(class.origin))?,
                            AubryItem::Interval { arc, interval, .. } => {
                                writeln!(out, "{},{},interval,{arc},{},{}", class.id, origin(class.origin), interval[0], interval[1])?
                            }
                        }
                    }
                }
                self.write(&out)
            }
        }
    }

    pub fn distance(&self, level: f64, value: f64, certificate: &PathCertificate, from: &str, to: &str) -> Result<()> {
        match self.format {
            Format::Json => self.json(json!({"level": level, "from": from, "to": to, "value": value, "certificate": certificate})),
            Format::Csv => {
                let mut out = self.csv_header();
                writeln!(out, "# value: {value}\narc,dir,s1,s2,cost")?;
                for leg in &certificate.legs {
                    writeln!(out, "{},{},{},{},{}", leg.arc, leg.dir, leg.s[0], leg.s[1], leg.cost)?;
                }
                self.write(&out)
            }
        }
    }

    pub fn field(&self, u: &FieldOnNetwork) -> Result<()> {
        match self.format {
            Format::Json => {
                let doc = u.to_document(self.inst, Some(self.config()));
                self.write(&(serde_json::to_string_pretty(&doc)? + "\n"))
            }
            Format::Csv => self.write(&(self.csv_header() + &u.to_csv(self.inst))),
        }
    }
}

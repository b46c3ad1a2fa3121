use std::collections::{HashMap, HashSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type BusId = i64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bus {
    pub id: BusId,
    #[serde(rename = "reference")]
    pub is_reference: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Branch {
    #[serde(rename = "from")]
    pub from_bus: BusId,
    #[serde(rename = "to")]
    pub to_bus: BusId,
    /// Series reactance in per-unit; never zero.
    #[serde(rename = "x")]
    pub reactance_x: f64,
}

impl Branch {
    /// Branch susceptance `1/x`.
    pub fn susceptance(&self) -> f64 {
        1.0 / self.reactance_x
    }
}

/// Bus/branch topology of a test system.
///
/// Constructed only through [`GridCase::new`] or the parsers, all of which
/// validate: unique bus ids, known branch endpoints, nonzero reactances, a
/// single reference bus and a connected branch graph.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawCase", into = "RawCase")]
pub struct GridCase {
    name: String,
    base_mva: f64,
    buses: Vec<Bus>,
    branches: Vec<Branch>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCase {
    name: String,
    base_mva: f64,
    buses: Vec<Bus>,
    branches: Vec<Branch>,
}

impl TryFrom<RawCase> for GridCase {
    type Error = Error;

    fn try_from(raw: RawCase) -> Result<Self> {
        GridCase::new(raw.name, raw.base_mva, raw.buses, raw.branches)
    }
}

impl From<GridCase> for RawCase {
    fn from(case: GridCase) -> Self {
        RawCase {
            name: case.name,
            base_mva: case.base_mva,
            buses: case.buses,
            branches: case.branches,
        }
    }
}

impl GridCase {
    pub fn new(
        name: impl Into<String>,
        base_mva: f64,
        buses: Vec<Bus>,
        branches: Vec<Branch>,
    ) -> Result<Self> {
        let case = GridCase {
            name: name.into(),
            base_mva,
            buses,
            branches,
        };
        case.validate()?;
        Ok(case)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn base_mva(&self) -> f64 {
        self.base_mva
    }

    pub fn buses(&self) -> &[Bus] {
        &self.buses
    }

    pub fn branches(&self) -> &[Branch] {
        &self.branches
    }

    pub fn bus_count(&self) -> usize {
        self.buses.len()
    }

    pub fn branch_count(&self) -> usize {
        self.branches.len()
    }

    /// Position of the reference bus in bus order.
    pub fn reference_index(&self) -> usize {
        self.buses
            .iter()
            .position(|b| b.is_reference)
            .expect("validated case has a reference bus")
    }

    /// Map from bus id to its column position.
    pub fn bus_index(&self) -> HashMap<BusId, usize> {
        self.buses
            .iter()
            .enumerate()
            .map(|(i, b)| (b.id, i))
            .collect()
    }

    fn validate(&self) -> Result<()> {
        if !(self.base_mva.is_finite() && self.base_mva > 0.0) {
            return Err(Error::Validation(format!(
                "base_mva must be positive, got {}",
                self.base_mva
            )));
        }
        if self.buses.is_empty() {
            return Err(Error::Validation("case has no buses".into()));
        }
        let mut seen = HashSet::new();
        for bus in &self.buses {
            if !seen.insert(bus.id) {
                return Err(Error::Validation(format!("duplicate bus id {}", bus.id)));
            }
        }
        let refs: Vec<BusId> = self
            .buses
            .iter()
            .filter(|b| b.is_reference)
            .map(|b| b.id)
            .collect();
        match refs.len() {
            1 => {}
            0 => return Err(Error::Validation("no reference bus".into())),
            _ => {
                return Err(Error::Validation(format!(
                    "multiple reference buses: {refs:?}"
                )))
            }
        }
        for (k, br) in self.branches.iter().enumerate() {
            for end in [br.from_bus, br.to_bus] {
                if !seen.contains(&end) {
                    return Err(Error::Validation(format!(
                        "branch {} ({} -> {}) references unknown bus {}",
                        k + 1,
                        br.from_bus,
                        br.to_bus,
                        end
                    )));
                }
            }
            if br.from_bus == br.to_bus {
                return Err(Error::Validation(format!(
                    "branch {} is a self-loop on bus {}",
                    k + 1,
                    br.from_bus
                )));
            }
            if br.reactance_x == 0.0 || !br.reactance_x.is_finite() {
                return Err(Error::Validation(format!(
                    "branch {} ({} -> {}) has invalid reactance {}",
                    k + 1,
                    br.from_bus,
                    br.to_bus,
                    br.reactance_x
                )));
            }
        }
        self.check_connected()
    }

    fn check_connected(&self) -> Result<()> {
        let index = self.bus_index();
        let mut adj = vec![Vec::new(); self.buses.len()];
        for br in &self.branches {
            let (i, j) = (index[&br.from_bus], index[&br.to_bus]);
            adj[i].push(j);
            adj[j].push(i);
        }
        let mut visited = vec![false; self.buses.len()];
        let mut queue = VecDeque::from([0usize]);
        visited[0] = true;
        while let Some(i) = queue.pop_front() {
            for &j in &adj[i] {
                if !visited[j] {
                    visited[j] = true;
                    queue.push_back(j);
                }
            }
        }
        match visited.iter().position(|v| !v) {
            None => Ok(()),
            Some(i) => Err(Error::Validation(format!(
                "branch graph is disconnected: bus {} unreachable from bus {}",
                self.buses[i].id, self.buses[0].id
            ))),
        }
    }

    /// Serializes to the JSON grid format.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("grid case serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| {
            let message = e.to_string();
            if message.starts_with("validation error") {
                Error::Validation(message)
            } else {
                Error::Parse {
                    line: e.line(),
                    message,
                }
            }
        })
    }
}

/// Parses either a MATPOWER case file or the JSON grid format. JSON is
/// recognised by a leading `{`.
pub fn parse_case(text: &str) -> Result<GridCase> {
    if text.trim_start().starts_with('{') {
        GridCase::from_json(text)
    } else {
        parse_matpower(text)
    }
}

/// Parses the `mpc.baseMVA`, `mpc.bus` and `mpc.branch` entries of a
/// MATPOWER case file. Other matrices and columns are ignored.
pub fn parse_matpower(text: &str) -> Result<GridCase> {
    let mut name = String::from("unnamed");
    let mut base_mva = None;
    let mut bus_rows: Option<Vec<(usize, Vec<f64>)>> = None;
    let mut branch_rows: Option<Vec<(usize, Vec<f64>)>> = None;

    // (matrix name, rows collected so far)
    let mut open: Option<(String, Vec<(usize, Vec<f64>)>)> = None;
    let mut last_line = 0;

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        last_line = line_no;
        let line = raw.split('%').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }

        let mut body = line;
        if open.is_none() {
            if let Some(rest) = line.strip_prefix("function") {
                if let Some((_, n)) = rest.split_once('=') {
                    name = n.trim().trim_end_matches(';').to_string();
                }
                continue;
            }
            let Some(rest) = line.strip_prefix("mpc.") else {
                continue;
            };
            let Some((key, value)) = rest.split_once('=') else {
                continue;
            };
            let key = key.trim();
            let value = value.trim();
            if key == "baseMVA" {
                let v = value.trim_end_matches(';').trim();
                base_mva = Some(v.parse::<f64>().map_err(|_| Error::Parse {
                    line: line_no,
                    message: format!("invalid baseMVA value '{v}'"),
                })?);
                continue;
            }
            match value.strip_prefix('[') {
                Some(after) => {
                    open = Some((key.to_string(), Vec::new()));
                    body = after;
                }
                None => continue,
            }
        }

        let (key, rows) = open.as_mut().expect("matrix is open");
        let (content, closes) = match body.find(']') {
            Some(pos) => (&body[..pos], true),
            None => (body, false),
        };
        let tracked = key == "bus" || key == "branch";
        for segment in content.split(';') {
            let tokens: Vec<&str> = segment
                .split(|c: char| c.is_whitespace() || c == ',')
                .filter(|t| !t.is_empty())
                .collect();
            if tokens.is_empty() || !tracked {
                continue;
            }
            let mut row = Vec::with_capacity(tokens.len());
            for tok in tokens {
                row.push(parse_number(tok).ok_or_else(|| Error::Parse {
                    line: line_no,
                    message: format!("invalid number '{tok}' in mpc.{key}"),
                })?);
            }
            rows.push((line_no, row));
        }
        if closes {
            let (key, rows) = open.take().expect("matrix is open");
            match key.as_str() {
                "bus" => bus_rows = Some(rows),
                "branch" => branch_rows = Some(rows),
                _ => {}
            }
        }
    }

    if let Some((key, _)) = open {
        return Err(Error::Parse {
            line: last_line,
            message: format!("unterminated matrix mpc.{key}"),
        });
    }
    let bus_rows = bus_rows.ok_or_else(|| Error::Parse {
        line: last_line,
        message: "missing mpc.bus matrix".into(),
    })?;
    let branch_rows = branch_rows.ok_or_else(|| Error::Parse {
        line: last_line,
        message: "missing mpc.branch matrix".into(),
    })?;

    let mut buses = Vec::with_capacity(bus_rows.len());
    for (line, row) in bus_rows {
        if row.len() < 2 {
            return Err(Error::Parse {
                line,
                message: "bus row needs at least 2 columns".into(),
            });
        }
        buses.push(Bus {
            id: as_id(row[0], line)?,
            is_reference: row[1] == 3.0,
        });
    }
    let mut branches = Vec::with_capacity(branch_rows.len());
    for (line, row) in branch_rows {
        if row.len() < 4 {
            return Err(Error::Parse {
                line,
                message: "branch row needs at least 4 columns".into(),
            });
        }
        branches.push(Branch {
            from_bus: as_id(row[0], line)?,
            to_bus: as_id(row[1], line)?,
            reactance_x: row[3],
        });
    }

    GridCase::new(name, base_mva.unwrap_or(100.0), buses, branches)
}

fn parse_number(tok: &str) -> Option<f64> {
    match tok {
        "Inf" | "inf" => Some(f64::INFINITY),
        "-Inf" | "-inf" => Some(f64::NEG_INFINITY),
        _ => tok.parse().ok(),
    }
}

fn as_id(v: f64, line: usize) -> Result<BusId> {
    if v.fract() == 0.0 && v.is_finite() {
        Ok(v as BusId)
    } else {
        Err(Error::Parse {
            line,
            message: format!("bus id {v} is not an integer"),
        })
    }
}

//! Improvement ratios, per-task ranks and cross-task average ranks for
//! downstream-task result tables.
//!
//! A [`ResultTable`] holds one row of metric values per method plus a
//! baseline row. Each method's improvement ratio is the unweighted mean over
//! all columns of its signed relative improvement on the baseline, in
//! percent. Methods are ranked within a task by that ratio, and
//! [`average_rank`] averages the ranks over every task a method takes part
//! in.
//!
//! CSV tables look like
//!
//! ```text
//! # task: stereo_matching
//! # excluded: SomeMethod
//! method,EPE:down,PSNR:up
//! w/o depth,0.5,24.1
//! SomeMethod,0.45,24.9
//! ```
//!
//! Lines starting with `#` are comments; `# task:` and `# excluded:` comments
//! set the corresponding fields. The task defaults to the file stem.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Baseline row name used when none is given.
pub const DEFAULT_BASELINE: &str = "w/o depth";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Direction {
    #[serde(rename = "down", alias = "lower_better")]
    LowerBetter,
    #[serde(rename = "up", alias = "higher_better")]
    HigherBetter,
}

impl Direction {
    pub fn flipped(self) -> Self {
        match self {
            Direction::LowerBetter => Direction::HigherBetter,
            Direction::HigherBetter => Direction::LowerBetter,
        }
    }

    pub fn suffix(self) -> &'static str {
        match self {
            Direction::LowerBetter => "down",
            Direction::HigherBetter => "up",
        }
    }
}

impl FromStr for Direction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "down" => Ok(Direction::LowerBetter),
            "up" => Ok(Direction::HigherBetter),
            other => Err(Error::Parse(format!(
                "direction must be `up` or `down`, got `{other}`"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MetricColumn {
    pub name: String,
    pub direction: Direction,
}

impl MetricColumn {
    pub fn new(name: impl Into<String>, direction: Direction) -> Self {
        Self {
            name: name.into(),
            direction,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultTable {
    pub task: String,
    pub columns: Vec<MetricColumn>,
    pub rows: IndexMap<String, Vec<f64>>,
    pub baseline: String,
    #[serde(default)]
    pub excluded: Vec<String>,
}

impl ResultTable {
    pub fn new(
        task: impl Into<String>,
        columns: Vec<MetricColumn>,
        rows: IndexMap<String, Vec<f64>>,
        baseline: impl Into<String>,
        excluded: Vec<String>,
    ) -> Result<Self> {
        let table = Self {
            task: task.into(),
            columns,
            rows,
            baseline: baseline.into(),
            excluded,
        };
        table.validate()?;
        Ok(table)
    }

    pub fn validate(&self) -> Result<()> {
        if self.columns.is_empty() {
            return Err(Error::Parse(format!(
                "table `{}` has no metric columns",
                self.task
            )));
        }
        for (method, values) in &self.rows {
            if values.len() != self.columns.len() {
                return Err(Error::Parse(format!(
                    "row `{method}` has {} values, expected {}",
                    values.len(),
                    self.columns.len()
                )));
            }
            if let Some(v) = values.iter().find(|v| !v.is_finite()) {
                return Err(Error::Parse(format!(
                    "row `{method}` has non-finite value {v}"
                )));
            }
        }
        if !self.rows.contains_key(&self.baseline) {
            return Err(invalid(format!(
                "baseline `{}` not found in table `{}`",
                self.baseline, self.task
            )));
        }
        for name in &self.excluded {
            if name == &self.baseline {
                return Err(invalid(format!("baseline `{name}` cannot be excluded")));
            }
            if !self.rows.contains_key(name) {
                return Err(invalid(format!("excluded method `{name}` not in table")));
            }
        }
        Ok(())
    }

    pub fn is_excluded(&self, method: &str) -> bool {
        self.excluded.iter().any(|e| e == method)
    }

    /// Methods other than the baseline, in table order.
    pub fn methods(&self) -> impl Iterator<Item = &str> {
        self.rows
            .keys()
            .map(String::as_str)
            .filter(move |m| *m != self.baseline)
    }

    /// Methods that take part in the ranking.
    pub fn candidates(&self) -> impl Iterator<Item = &str> {
        self.methods().filter(move |m| !self.is_excluded(m))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TableFormat {
    Csv,
    Json,
}

impl TableFormat {
    /// `.json` files are JSON, everything else CSV.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("json") => TableFormat::Json,
            _ => TableFormat::Csv,
        }
    }
}

impl FromStr for TableFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "csv" => Ok(TableFormat::Csv),
            "json" => Ok(TableFormat::Json),
            other => Err(invalid(format!("unknown table format `{other}`"))),
        }
    }
}

/// Loads a table. `baseline` overrides the one stored in a JSON table; CSV
/// tables fall back to [`DEFAULT_BASELINE`].
pub fn load_table(path: &Path, format: TableFormat, baseline: Option<&str>) -> Result<ResultTable> {
    let text = fs::read_to_string(path)?;
    match format {
        TableFormat::Json => {
            let mut table: ResultTable = serde_json::from_str(&text)?;
            if let Some(b) = baseline {
                table.baseline = b.to_string();
            }
            table.validate()?;
            Ok(table)
        }
        TableFormat::Csv => {
            let stem = path
                .file_stem()
                .and_then(|s| s.to_str())
                .unwrap_or("task")
                .to_string();
            parse_csv_table(&text, &stem, baseline.unwrap_or(DEFAULT_BASELINE))
        }
    }
}

/// Parses the CSV form described in the module docs.
pub fn parse_csv_table(text: &str, default_task: &str, baseline: &str) -> Result<ResultTable> {
    let mut task = default_task.to_string();
    let mut excluded = Vec::new();
    let mut columns: Option<Vec<MetricColumn>> = None;
    let mut rows = IndexMap::new();

    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(comment) = line.strip_prefix('#') {
            let comment = comment.trim();
            if let Some(t) = comment.strip_prefix("task:") {
                task = t.trim().to_string();
            } else if let Some(list) = comment.strip_prefix("excluded:") {
                excluded.extend(
                    list.split(',')
                        .map(str::trim)
                        .filter(|s| !s.is_empty())
                        .map(String::from),
                );
            }
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        let Some(cols) = &columns else {
            if fields.first().copied() != Some("method") {
                return Err(Error::Parse(format!(
                    "line {}: header must start with `method`",
                    lineno + 1
                )));
            }
            columns = Some(
                fields[1..]
                    .iter()
                    .map(|f| {
                        let (name, dir) = f.rsplit_once(':').ok_or_else(|| {
                            Error::Parse(format!("column `{f}` lacks an `:up`/`:down` suffix"))
                        })?;
                        Ok(MetricColumn::new(name.trim(), dir.parse()?))
                    })
                    .collect::<Result<_>>()?,
            );
            continue;
        };
        if fields.len() != cols.len() + 1 {
            return Err(Error::Parse(format!(
                "line {}: expected {} fields, found {}",
                lineno + 1,
                cols.len() + 1,
                fields.len()
            )));
        }
        let values = fields[1..]
            .iter()
            .map(|f| {
                f.parse::<f64>()
                    .map_err(|_| Error::Parse(format!("line {}: bad number `{f}`", lineno + 1)))
            })
            .collect::<Result<Vec<_>>>()?;
        let method = fields[0].to_string();
        if rows.insert(method.clone(), values).is_some() {
            return Err(Error::Parse(format!("duplicate method `{method}`")));
        }
    }

    let columns = columns.ok_or_else(|| Error::Parse("missing header line".into()))?;
    ResultTable::new(task, columns, rows, baseline, excluded)
}

/// Signed relative improvement of `value` over `base` in percent.
pub fn cell_improvement(value: f64, base: f64, direction: Direction) -> f64 {
    match direction {
        Direction::LowerBetter => 100.0 * (base - value) / base,
        Direction::HigherBetter => 100.0 * (value - base) / base,
    }
}

/// Unweighted mean of the per-cell improvements of `method` on the baseline.
pub fn improvement_ratio(table: &ResultTable, method: &str) -> Result<f64> {
    let row = table
        .rows
        .get(method)
        .ok_or_else(|| invalid(format!("method `{method}` not in table `{}`", table.task)))?;
    let base = &table.rows[&table.baseline];
    let mut sum = 0.0;
    for ((col, &v), &b) in table.columns.iter().zip(row).zip(base) {
        if b == 0.0 {
            return Err(Error::DegenerateBaseline(format!(
                "baseline `{}` is zero in column `{}` of `{}`",
                table.baseline, col.name, table.task
            )));
        }
        sum += cell_improvement(v, b, col.direction);
    }
    Ok(sum / table.columns.len() as f64)
}

/// Competition ranks of the candidates by improvement ratio, best first.
pub fn task_rank(table: &ResultTable) -> Result<IndexMap<String, usize>> {
    let imps = table
        .candidates()
        .map(|m| Ok((m.to_string(), improvement_ratio(table, m)?)))
        .collect::<Result<Vec<_>>>()?;
    if imps.is_empty() {
        return Err(invalid(format!(
            "table `{}` has no ranked methods",
            table.task
        )));
    }
    Ok(competition_rank(&imps))
}

fn competition_rank(imps: &[(String, f64)]) -> IndexMap<String, usize> {
    let mut order: Vec<usize> = (0..imps.len()).collect();
    order.sort_by(|&a, &b| imps[b].1.total_cmp(&imps[a].1));
    order
        .into_iter()
        .map(|i| {
            let better = imps.iter().filter(|(_, v)| *v > imps[i].1).count();
            (imps[i].0.clone(), better + 1)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskEntry {
    #[serde(serialize_with = "two_decimals")]
    pub imp_percent: f64,
    /// `None` for methods excluded from the task's ranking.
    pub rank: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankReport {
    pub per_task: IndexMap<String, IndexMap<String, TaskEntry>>,
    #[serde(serialize_with = "two_decimals_map")]
    pub average_rank: IndexMap<String, f64>,
    pub tasks_counted: IndexMap<String, usize>,
}

fn round2(v: f64) -> f64 {
    let r = (v * 100.0).round() / 100.0;
    if r == 0.0 {
        0.0
    } else {
        r
    }
}

fn two_decimals<S: serde::Serializer>(v: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_f64(round2(*v))
}

fn two_decimals_map<S: serde::Serializer>(
    m: &IndexMap<String, f64>,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeMap;
    let mut map = s.serialize_map(Some(m.len()))?;
    for (k, v) in m {
        map.serialize_entry(k, &round2(*v))?;
    }
    map.end()
}

/// Mean rank per method over the tasks where it has a rank, with the
/// number of tasks counted. Methods never ranked are omitted. Order follows
/// first appearance.
pub fn mean_ranks<'a, I, M>(per_task: I) -> (IndexMap<String, f64>, IndexMap<String, usize>)
where
    I: IntoIterator<Item = M>,
    M: IntoIterator<Item = (&'a str, usize)>,
{
    let mut sums: IndexMap<String, (usize, usize)> = IndexMap::new();
    for ranks in per_task {
        for (method, rank) in ranks {
            let e = sums.entry(method.to_string()).or_default();
            e.0 += rank;
            e.1 += 1;
        }
    }
    let average = sums
        .iter()
        .map(|(m, &(sum, n))| (m.clone(), sum as f64 / n as f64))
        .collect();
    let counts = sums.into_iter().map(|(m, (_, n))| (m, n)).collect();
    (average, counts)
}

/// Ranks every table and averages the ranks across tables.
pub fn average_rank(tables: &[ResultTable]) -> Result<RankReport> {
    if tables.is_empty() {
        return Err(invalid("no tables to rank"));
    }
    let mut tasks = BTreeSet::new();
    let mut per_task = IndexMap::new();
    for table in tables {
        if !tasks.insert(table.task.as_str()) {
            return Err(invalid(format!("task `{}` appears twice", table.task)));
        }
        let ranks = task_rank(table)?;
        let entries = table
            .methods()
            .map(|m| {
                Ok((
                    m.to_string(),
                    TaskEntry {
                        imp_percent: improvement_ratio(table, m)?,
                        rank: ranks.get(m).copied(),
                    },
                ))
            })
            .collect::<Result<IndexMap<_, _>>>()?;
        per_task.insert(table.task.clone(), entries);
    }
    let (average_rank, tasks_counted) = mean_ranks(per_task.values().map(|entries| {
        entries
            .iter()
            .filter_map(|(m, e)| e.rank.map(|r| (m.as_str(), r)))
    }));
    Ok(RankReport {
        per_task,
        average_rank,
        tasks_counted,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Json,
    Markdown,
}

impl FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "json" => Ok(ReportFormat::Json),
            "md" | "markdown" => Ok(ReportFormat::Markdown),
            other => Err(invalid(format!("unknown report format `{other}`"))),
        }
    }
}

fn fmt_imp(v: f64) -> String {
    format!("{:+.2}", round2(v))
}

fn fmt_rank(r: Option<usize>) -> String {
    r.map_or_else(|| "-".to_string(), |r| r.to_string())
}

/// Renders a report. Markdown gets an average-rank table sorted best first
/// when more than one task is present, followed by one section per task.
pub fn emit_report(report: &RankReport, format: ReportFormat) -> Result<String> {
    if report.per_task.is_empty() {
        return Err(invalid("report has no tasks"));
    }
    match format {
        ReportFormat::Json => Ok(serde_json::to_string_pretty(report)? + "\n"),
        ReportFormat::Markdown => Ok(markdown(report)),
    }
}

fn markdown(report: &RankReport) -> String {
    let mut s = String::new();
    if report.per_task.len() > 1 {
        let mut methods: Vec<(&String, f64)> =
            report.average_rank.iter().map(|(m, &r)| (m, r)).collect();
        methods.sort_by(|a, b| a.1.total_cmp(&b.1).then_with(|| a.0.cmp(b.0)));

        s.push_str("## Average rank\n\n| Method | Avg rank |");
        for task in report.per_task.keys() {
            write!(s, " {task} imp (%) | {task} rank |").unwrap();
        }
        s.push_str("\n|---|---:|");
        for _ in report.per_task.keys() {
            s.push_str("---:|---:|");
        }
        s.push('\n');
        for (m, avg) in methods {
            write!(s, "| {m} | {avg:.2} |").unwrap();
            for entries in report.per_task.values() {
                match entries.get(m) {
                    Some(e) => write!(s, " {} | {} |", fmt_imp(e.imp_percent), fmt_rank(e.rank)),
                    None => write!(s, " - | - |"),
                }
                .unwrap();
            }
            s.push('\n');
        }
        s.push('\n');
    }

    for (i, (task, entries)) in report.per_task.iter().enumerate() {
        if i > 0 {
            s.push('\n');
        }
        writeln!(
            s,
            "## {task}\n\n| Method | imp (%) | rank |\n|---|---:|---:|"
        )
        .unwrap();
        let mut rows: Vec<(&String, &TaskEntry)> = entries.iter().collect();
        rows.sort_by_key(|(_, e)| e.rank.unwrap_or(usize::MAX));
        for (m, e) in rows {
            writeln!(
                s,
                "| {m} | {} | {} |",
                fmt_imp(e.imp_percent),
                fmt_rank(e.rank)
            )
            .unwrap();
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn table(rows: &[(&str, &[f64])], dirs: &[Direction]) -> ResultTable {
        let columns = dirs
            .iter()
            .enumerate()
            .map(|(i, &d)| MetricColumn::new(format!("c{i}"), d))
            .collect();
        let rows = rows
            .iter()
            .map(|(m, v)| (m.to_string(), v.to_vec()))
            .collect();
        ResultTable::new("t", columns, rows, "base", vec![]).unwrap()
    }

    use Direction::{HigherBetter as Up, LowerBetter as Down};

    #[test]
    fn csv_parsing() {
        let t = parse_csv_table(
            "# comment\n# excluded: b\nmethod,e:down,p:up\nbase,1,10\na,0.5,12\nb,2,9\n",
            "stem",
            "base",
        )
        .unwrap();
        assert_eq!(t.task, "stem");
        assert_eq!(t.columns[1], MetricColumn::new("p", Up));
        assert_eq!(t.excluded, vec!["b"]);
        assert_eq!(t.candidates().collect::<Vec<_>>(), vec!["a"]);
    }

    #[test]
    fn csv_errors() {
        let parse = |s: &str| parse_csv_table(s, "t", "base");
        assert!(matches!(parse("method,e\nbase,1\n"), Err(Error::Parse(_))));
        assert!(matches!(
            parse("method,e:sideways\nbase,1\n"),
            Err(Error::Parse(_))
        ));
        assert!(matches!(
            parse("method,e:up\nbase,1,2\n"),
            Err(Error::Parse(_))
        ));
        assert!(matches!(
            parse("method,e:up\nother,1\n"),
            Err(Error::InvalidArgument(_))
        ));
        assert!(matches!(
            parse("method,e:up\nbase,x\n"),
            Err(Error::Parse(_))
        ));
        assert!(matches!(parse("# only\n"), Err(Error::Parse(_))));
        assert!(matches!(
            parse("# excluded: base\nmethod,e:up\nbase,1\n"),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn improvement_examples() {
        let t = table(
            &[
                ("base", &[2.0, 10.0]),
                ("same", &[2.0, 10.0]),
                ("a", &[1.0, 11.0]),
            ],
            &[Down, Up],
        );
        assert_eq!(improvement_ratio(&t, "same").unwrap(), 0.0);
        assert!((improvement_ratio(&t, "a").unwrap() - 30.0).abs() < 1e-12);
        assert!(improvement_ratio(&t, "missing").is_err());

        let z = table(&[("base", &[0.0]), ("a", &[1.0])], &[Down]);
        assert!(matches!(
            improvement_ratio(&z, "a"),
            Err(Error::DegenerateBaseline(_))
        ));
    }

    #[test]
    fn competition_ties() {
        let t = table(
            &[
                ("base", &[1.0]),
                ("a", &[1.0]),
                ("b", &[1.0]),
                ("c", &[1.0]),
            ],
            &[Down],
        );
        assert!(task_rank(&t).unwrap().values().all(|&r| r == 1));

        let t = table(
            &[
                ("base", &[1.0]),
                ("a", &[0.5]),
                ("b", &[0.5]),
                ("c", &[0.9]),
            ],
            &[Down],
        );
        let r = task_rank(&t).unwrap();
        assert_eq!((r["a"], r["b"], r["c"]), (1, 1, 3));

        let lonely = table(&[("base", &[1.0])], &[Down]);
        assert!(task_rank(&lonely).is_err());
    }

    #[test]
    fn mean_ranks_skip_absent_tasks() {
        let (avg, n) = mean_ranks(vec![
            vec![("m", 1), ("k", 2)],
            vec![("k", 1)],
            vec![("m", 3), ("k", 4)],
            vec![],
        ]);
        assert_eq!(avg["m"], 2.0);
        assert_eq!(n["m"], 2);
        assert!((avg["k"] - 7.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn report_rendering() {
        let t1 = table(&[("base", &[1.0]), ("a", &[0.5]), ("b", &[0.9])], &[Down]);
        let mut t2 = table(&[("base", &[1.0]), ("a", &[1.5]), ("b", &[0.6])], &[Down]);
        t2.task = "u".into();
        let report = average_rank(&[t1.clone(), t2]).unwrap();
        assert_eq!(report.average_rank["a"], 1.5);
        let md = emit_report(&report, ReportFormat::Markdown).unwrap();
        assert!(md.starts_with("## Average rank"));
        assert!(
            md.contains("| a | 1.50 | +50.00 | 1 | -50.00 | 2 |"),
            "{md}"
        );

        let single = average_rank(std::slice::from_ref(&t1)).unwrap();
        let md = emit_report(&single, ReportFormat::Markdown).unwrap();
        assert!(!md.contains("Average rank"));
        assert!(md.starts_with("## t"));

        let json = emit_report(&report, ReportFormat::Json).unwrap();
        let back: RankReport = serde_json::from_str(&json).unwrap();
        assert_eq!(back.average_rank, report.average_rank);
        assert_eq!(emit_report(&back, ReportFormat::Json).unwrap(), json);

        let empty = RankReport {
            per_task: IndexMap::new(),
            average_rank: IndexMap::new(),
            tasks_counted: IndexMap::new(),
        };
        assert!(emit_report(&empty, ReportFormat::Json).is_err());
        assert!(average_rank(&[t1.clone(), t1]).is_err());
    }

    fn arb_table() -> impl Strategy<Value = (Vec<Vec<f64>>, Vec<bool>)> {
        (1usize..6, 2usize..7).prop_flat_map(|(cols, methods)| {
            (
                prop::collection::vec(prop::collection::vec(0.1f64..10.0, cols), methods),
                prop::collection::vec(any::<bool>(), cols),
            )
        })
    }

    fn build(values: &[Vec<f64>], ups: &[bool]) -> ResultTable {
        let rows: Vec<(String, Vec<f64>)> = values
            .iter()
            .enumerate()
            .map(|(i, v)| {
                let name = if i == 0 {
                    "base".to_string()
                } else {
                    format!("m{i}")
                };
                (name, v.clone())
            })
            .collect();
        let columns = ups
            .iter()
            .enumerate()
            .map(|(i, &u)| MetricColumn::new(format!("c{i}"), if u { Up } else { Down }))
            .collect();
        ResultTable::new("p", columns, rows.into_iter().collect(), "base", vec![]).unwrap()
    }

    proptest! {
        #[test]
        fn column_rescaling_preserves_imp(
            (values, ups) in arb_table(),
            c in 0.01f64..100.0,
            col in 0usize..6,
        ) {
            let t = build(&values, &ups);
            let mut scaled = t.clone();
            let col = col % ups.len();
            for row in scaled.rows.values_mut() {
                row[col] *= c;
            }
            for m in t.methods() {
                let a = improvement_ratio(&t, m).unwrap();
                let b = improvement_ratio(&scaled, m).unwrap();
                prop_assert!((a - b).abs() <= 1e-9 * (1.0 + a.abs()));
            }
        }

        #[test]
        fn direction_duality((values, ups) in arb_table(), col in 0usize..6) {
            let t = build(&values, &ups);
            let col = col % ups.len();
            let base = t.rows["base"][col];
            for m in t.methods() {
                let v = t.rows[m][col];
                let d = t.columns[col].direction;
                let a = cell_improvement(v, base, d);
                let b = cell_improvement(2.0 * base - v, base, d.flipped());
                prop_assert!((a - b).abs() <= 1e-9 * (1.0 + a.abs()));
            }
        }

        #[test]
        fn singleton_average_equals_task_rank((values, ups) in arb_table()) {
            let t = build(&values, &ups);
            let ranks = task_rank(&t).unwrap();
            let report = average_rank(std::slice::from_ref(&t)).unwrap();
            prop_assert_eq!(report.average_rank.len(), ranks.len());
            for (m, r) in &ranks {
                prop_assert_eq!(report.average_rank[m], *r as f64);
                prop_assert_eq!(report.tasks_counted[m], 1);
            }
        }
    }
}

//! Text file formats: time series, snapshots, equilibrium and checkpoints.
//!
//! Every float is written with `{:.16e}` (17 significant digits), which
//! parses back to the identical `f64`. Header lines start with `#` and hold
//! `key value` pairs.

use std::collections::BTreeMap;
use std::fs::{self, File, OpenOptions};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::boundary::InflowCache;
use crate::diagnostics::DiagnosticsRecord;
use crate::equilibrium::EquilibriumSolution;
use crate::error::{Result, SheathError};
use crate::mesh::{make_phase_grid, DistributionField, PhysicalParams, SimState};
use crate::transport::RunSinks;

pub const TIMESERIES_HEADER: &str = "t,J0,energy,energy_kinetic,energy_field,ne_total,ni_total,ne_l1,ni_l1,ne_l2,ni_l2";
pub const TIMESERIES_FILE: &str = "timeseries.csv";
pub const EQUILIBRIUM_FILE: &str = "equilibrium.txt";

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent).map_err(|e| SheathError::io(parent, e))?;
        }
    }
    Ok(BufWriter::new(File::create(path).map_err(|e| SheathError::io(path, e))?))
}

fn read_lines(path: &Path) -> Result<Vec<String>> {
    let file = File::open(path).map_err(|e| SheathError::io(path, e))?;
    BufReader::new(file).lines().collect::<std::io::Result<_>>().map_err(|e| SheathError::io(path, e))
}

fn parse_f64(tok: &str, line: usize) -> Result<f64> {
    tok.parse().map_err(|_| SheathError::Parse { line, msg: format!("'{tok}' is not a number") })
}

fn parse_usize(tok: &str, line: usize) -> Result<usize> {
    tok.parse().map_err(|_| SheathError::Parse { line, msg: format!("'{tok}' is not a count") })
}

/// `# key value` header lines followed by whitespace-separated numeric rows.
struct TextTable {
    meta: BTreeMap<String, (String, usize)>,
    rows: Vec<(usize, Vec<f64>)>,
}

impl TextTable {
    fn read(path: &Path) -> Result<Self> {
        let mut meta = BTreeMap::new();
        let mut rows = Vec::new();
        for (k, line) in read_lines(path)?.iter().enumerate() {
            let n = k + 1;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('#') {
                let mut it = rest.split_whitespace();
                if let (Some(key), Some(val), None) = (it.next(), it.next(), it.next()) {
                    meta.insert(key.to_string(), (val.to_string(), n));
                }
                continue;
            }
            let row = line.split_whitespace().map(|t| parse_f64(t, n)).collect::<Result<Vec<_>>>()?;
            rows.push((n, row));
        }
        Ok(TextTable { meta, rows })
    }

    fn raw(&self, key: &str) -> Result<&(String, usize)> {
        self.meta.get(key).ok_or_else(|| SheathError::Parse { line: 0, msg: format!("missing header '{key}'") })
    }

    fn f64(&self, key: &str) -> Result<f64> {
        let (v, n) = self.raw(key)?;
        parse_f64(v, *n)
    }

    fn usize(&self, key: &str) -> Result<usize> {
        let (v, n) = self.raw(key)?;
        parse_usize(v, *n)
    }

    fn str(&self, key: &str) -> Result<&str> {
        Ok(self.raw(key)?.0.as_str())
    }
}

// ---------------------------------------------------------------- time series

/// Streams diagnostics records into a CSV file.
pub struct TimeSeriesWriter {
    out: BufWriter<File>,
    path: PathBuf,
}

impl TimeSeriesWriter {
    pub fn create(path: &Path) -> Result<Self> {
        let mut out = create(path)?;
        writeln!(out, "{TIMESERIES_HEADER}").map_err(|e| SheathError::io(path, e))?;
        Ok(TimeSeriesWriter { out, path: path.to_path_buf() })
    }

    /// Appends to an existing series (used when resuming).
    pub fn append(path: &Path) -> Result<Self> {
        if !path.exists() {
            return Self::create(path);
        }
        let file = OpenOptions::new().append(true).open(path).map_err(|e| SheathError::io(path, e))?;
        Ok(TimeSeriesWriter { out: BufWriter::new(file), path: path.to_path_buf() })
    }

    pub fn write(&mut self, r: &DiagnosticsRecord) -> Result<()> {
        writeln!(self.out, "{}", timeseries_row(r)).map_err(|e| SheathError::io(&self.path, e))
    }

    pub fn flush(&mut self) -> Result<()> {
        self.out.flush().map_err(|e| SheathError::io(&self.path, e))
    }
}

pub fn timeseries_row(r: &DiagnosticsRecord) -> String {
    [
        r.t,
        r.entry_current,
        r.energy.total,
        r.energy.kinetic,
        r.energy.field,
        r.electrons.total_density,
        r.ions.total_density,
        r.electrons.l1,
        r.ions.l1,
        r.electrons.l2,
        r.ions.l2,
    ]
    .iter()
    .map(|x| num(*x))
    .collect::<Vec<_>>()
    .join(",")
}

pub fn write_timeseries(path: &Path, records: &[DiagnosticsRecord]) -> Result<()> {
    let mut w = TimeSeriesWriter::create(path)?;
    for r in records {
        w.write(r)?;
    }
    w.flush()
}

pub fn read_timeseries(path: &Path) -> Result<Vec<DiagnosticsRecord>> {
    use crate::diagnostics::{Energy, Norms};
    let lines = read_lines(path)?;
    match lines.first() {
        Some(h) if h.trim() == TIMESERIES_HEADER => {}
        _ => return Err(SheathError::Parse { line: 1, msg: "missing time series header".into() }),
    }
    let mut out = Vec::with_capacity(lines.len() - 1);
    for (k, line) in lines.iter().enumerate().skip(1) {
        if line.trim().is_empty() {
            continue;
        }
        let v = line.split(',').map(|t| parse_f64(t.trim(), k + 1)).collect::<Result<Vec<_>>>()?;
        if v.len() != 11 {
            return Err(SheathError::Parse { line: k + 1, msg: format!("expected 11 columns, found {}", v.len()) });
        }
        out.push(DiagnosticsRecord {
            t: v[0],
            entry_current: v[1],
            energy: Energy { total: v[2], kinetic: v[3], field: v[4] },
            electrons: Norms { total_density: v[5], l1: v[7], l2: v[9] },
            ions: Norms { total_density: v[6], l1: v[8], l2: v[10] },
        });
    }
    Ok(out)
}

// ------------------------------------------------------------------ snapshots

/// Zero-padded time label used in snapshot file names, e.g. `t0000.010000`.
pub fn time_label(t: f64) -> String {
    format!("t{t:011.6}")
}

pub fn snapshot_paths(dir: &Path, t: f64) -> (PathBuf, PathBuf, PathBuf) {
    let label = time_label(t);
    (
        dir.join(format!("electrons_{label}.txt")),
        dir.join(format!("ions_{label}.txt")),
        dir.join(format!("field_{label}.txt")),
    )
}

fn write_distribution(out: &mut impl Write, f: &DistributionField) -> std::io::Result<()> {
    for row in f.rows() {
        let line: Vec<String> = row.iter().map(|x| num(*x)).collect();
        writeln!(out, "{}", line.join(" "))?;
    }
    Ok(())
}

fn write_species(path: &Path, species: &str, f: &DistributionField, t: f64, step: u64) -> Result<()> {
    let mut out = create(path)?;
    let g = &f.grid;
    let mut body = || -> std::io::Result<()> {
        writeln!(out, "# species {species}")?;
        writeln!(out, "# t {}", num(t))?;
        writeln!(out, "# step {step}")?;
        writeln!(out, "# nx {}", g.nx())?;
        writeln!(out, "# nv {}", g.nv())?;
        writeln!(out, "# x_min {}", num(g.x_mesh.lo))?;
        writeln!(out, "# x_max {}", num(g.x_mesh.hi))?;
        writeln!(out, "# v_min {}", num(g.v_mesh.lo))?;
        writeln!(out, "# v_max {}", num(g.v_mesh.hi))?;
        writeln!(out, "# rows x_i, columns v_j")?;
        write_distribution(&mut out, f)?;
        out.flush()
    };
    body().map_err(|e| SheathError::io(path, e))
}

fn read_species(path: &Path) -> Result<(DistributionField, f64, u64)> {
    let tab = TextTable::read(path)?;
    let (nx, nv) = (tab.usize("nx")?, tab.usize("nv")?);
    let grid = make_phase_grid(nx, nv, tab.f64("v_min")?, tab.f64("v_max")?)?;
    if tab.rows.len() != nx + 1 {
        return Err(SheathError::Parse { line: 0, msg: format!("{}: expected {} rows, found {}", path.display(), nx + 1, tab.rows.len()) });
    }
    let mut values = Vec::with_capacity(grid.len());
    for (n, row) in &tab.rows {
        if row.len() != nv + 1 {
            return Err(SheathError::Parse { line: *n, msg: format!("expected {} values, found {}", nv + 1, row.len()) });
        }
        values.extend_from_slice(row);
    }
    let f = DistributionField::from_values(grid, values)?;
    Ok((f, tab.f64("t")?, tab.usize("step")? as u64))
}

/// Writes electrons, ions and the field at the state's time.
pub fn write_snapshot(dir: &Path, state: &SimState) -> Result<()> {
    let (pe, pi, pf) = snapshot_paths(dir, state.time);
    write_species(&pe, "electrons", &state.f_e, state.time, state.step)?;
    write_species(&pi, "ions", &state.f_i, state.time, state.step)?;
    let mut out = create(&pf)?;
    let mesh = state.x_mesh();
    let mut body = || -> std::io::Result<()> {
        writeln!(out, "# t {}", num(state.time))?;
        writeln!(out, "# step {}", state.step)?;
        writeln!(out, "# nx {}", mesh.n_cells)?;
        writeln!(out, "# columns x E")?;
        for (i, e) in state.efield.iter().enumerate() {
            writeln!(out, "{} {}", num(mesh.node(i)), num(*e))?;
        }
        out.flush()
    };
    body().map_err(|e| SheathError::io(&pf, e))
}

/// Reads a snapshot written by [`write_snapshot`]; `electrons_path` names
/// the electron file and the ion and field files are found next to it.
pub fn read_snapshot(electrons_path: &Path) -> Result<SimState> {
    let name = electrons_path
        .file_name()
        .and_then(|n| n.to_str())
        .and_then(|n| n.strip_prefix("electrons_"))
        .ok_or_else(|| SheathError::Config(format!("{} is not an electron snapshot", electrons_path.display())))?;
    let dir = electrons_path.parent().unwrap_or(Path::new("."));
    let (f_e, t, step) = read_species(electrons_path)?;
    let (f_i, _, _) = read_species(&dir.join(format!("ions_{name}")))?;
    let field = TextTable::read(&dir.join(format!("field_{name}")))?;
    let efield = field
        .rows
        .iter()
        .map(|(n, r)| r.get(1).copied().ok_or(SheathError::Parse { line: *n, msg: "expected 'x E'".into() }))
        .collect::<Result<Vec<_>>>()?;
    let mut state = SimState::new(f_e, f_i, efield, t)?;
    state.step = step;
    Ok(state)
}

/// Electron snapshot files in `dir`, in time order.
pub fn list_snapshots(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut out: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| SheathError::io(dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.file_name()
                .and_then(|n| n.to_str())
                .is_some_and(|n| n.starts_with("electrons_t") && n.ends_with(".txt"))
        })
        .collect();
    out.sort();
    Ok(out)
}

// ---------------------------------------------------------------- equilibrium

pub fn write_equilibrium(path: &Path, eq: &EquilibriumSolution) -> Result<()> {
    let mut out = create(path)?;
    let p = &eq.params;
    let n = eq.grid_n;
    let mut body = || -> std::io::Result<()> {
        writeln!(out, "# N {n}")?;
        for (k, v) in [
            ("phi_w", eq.phi_w),
            ("n0", eq.n0),
            ("eps", p.eps),
            ("mu", p.mu),
            ("rho0", p.rho0),
            ("eta", p.eta),
            ("sigma", p.sigma),
            ("Z", p.drift),
        ] {
            writeln!(out, "# {k} {}", num(v))?;
        }
        writeln!(out, "# columns x phi E")?;
        for i in 0..=n {
            writeln!(out, "{} {} {}", num(i as f64 / n as f64), num(eq.phi[i]), num(eq.efield[i]))?;
        }
        out.flush()
    };
    body().map_err(|e| SheathError::io(path, e))
}

pub fn read_equilibrium(path: &Path) -> Result<EquilibriumSolution> {
    let tab = TextTable::read(path)?;
    let n = tab.usize("N")?;
    let params = PhysicalParams {
        mu: tab.f64("mu")?,
        eps: tab.f64("eps")?,
        rho0: tab.f64("rho0")?,
        eta: tab.f64("eta")?,
        sigma: tab.f64("sigma")?,
        drift: tab.f64("Z")?,
    };
    params.validate()?;
    if tab.rows.len() != n + 1 {
        return Err(SheathError::Parse { line: 0, msg: format!("expected {} rows, found {}", n + 1, tab.rows.len()) });
    }
    let mut phi = Vec::with_capacity(n + 1);
    let mut efield = Vec::with_capacity(n + 1);
    for (line, row) in &tab.rows {
        if row.len() != 3 {
            return Err(SheathError::Parse { line: *line, msg: "expected 'x phi E'".into() });
        }
        phi.push(row[1]);
        efield.push(row[2]);
    }
    let monotone = phi.windows(2).all(|w| w[1] <= w[0] + 1e-12);
    Ok(EquilibriumSolution { params, phi, phi_w: tab.f64("phi_w")?, n0: tab.f64("n0")?, efield, grid_n: n, monotone })
}

// ---------------------------------------------------------------- checkpoints

/// Everything needed to continue a run bit-identically.
#[derive(Clone, Debug, PartialEq)]
pub struct Checkpoint {
    pub state: SimState,
    pub inflow: InflowCache,
    /// Digest of the configuration that produced the state.
    pub config_digest: String,
}

pub fn checkpoint_path(dir: &Path, step: u64) -> PathBuf {
    dir.join(format!("checkpoint_step{step:010}.txt"))
}

pub fn write_checkpoint(path: &Path, ck: &Checkpoint) -> Result<()> {
    let mut out = create(path)?;
    let s = &ck.state;
    let mut body = || -> std::io::Result<()> {
        writeln!(out, "# step {}", s.step)?;
        writeln!(out, "# time {}", num(s.time))?;
        writeln!(out, "# config_digest {}", ck.config_digest)?;
        for (tag, f) in [("electrons", &s.f_e), ("ions", &s.f_i)] {
            let g = &f.grid;
            writeln!(out, "# {tag}_nx {}", g.nx())?;
            writeln!(out, "# {tag}_nv {}", g.nv())?;
            writeln!(out, "# {tag}_v_min {}", num(g.v_mesh.lo))?;
            writeln!(out, "# {tag}_v_max {}", num(g.v_mesh.hi))?;
        }
        // data rows in fixed order: inflow_e, inflow_i, E, f_e rows, f_i rows
        for block in [&ck.inflow.electrons, &ck.inflow.ions, &s.efield] {
            let line: Vec<String> = block.iter().map(|x| num(*x)).collect();
            writeln!(out, "{}", line.join(" "))?;
        }
        write_distribution(&mut out, &s.f_e)?;
        write_distribution(&mut out, &s.f_i)?;
        out.flush()
    };
    body().map_err(|e| SheathError::io(path, e))
}

pub fn read_checkpoint(path: &Path) -> Result<Checkpoint> {
    let tab = TextTable::read(path)?;
    let grid = |tag: &str| -> Result<_> {
        make_phase_grid(
            tab.usize(&format!("{tag}_nx"))?,
            tab.usize(&format!("{tag}_nv"))?,
            tab.f64(&format!("{tag}_v_min"))?,
            tab.f64(&format!("{tag}_v_max"))?,
        )
    };
    let (ge, gi) = (grid("electrons")?, grid("ions")?);
    let (time, step) = (tab.f64("time")?, tab.usize("step")? as u64);
    let config_digest = tab.str("config_digest")?.to_string();
    let mut rows = tab.rows.into_iter();
    let mut next = |len: usize, what: &str| -> Result<Vec<f64>> {
        let (n, row) = rows
            .next()
            .ok_or_else(|| SheathError::Parse { line: 0, msg: format!("checkpoint truncated before {what}") })?;
        if row.len() != len {
            return Err(SheathError::Parse { line: n, msg: format!("{what}: expected {len} values, found {}", row.len()) });
        }
        Ok(row)
    };
    let inflow = InflowCache {
        electrons: next(ge.v_mesh.n_nodes(), "electron inflow")?,
        ions: next(gi.v_mesh.n_nodes(), "ion inflow")?,
    };
    let efield = next(ge.x_mesh.n_nodes(), "field")?;
    let mut field = |g: crate::mesh::PhaseGrid, what: &str| -> Result<DistributionField> {
        let mut values = Vec::with_capacity(g.len());
        for _ in 0..g.x_mesh.n_nodes() {
            values.extend(next(g.v_mesh.n_nodes(), what)?);
        }
        DistributionField::from_values(g, values)
    };
    let f_e = field(ge, "electron distribution")?;
    let f_i = field(gi, "ion distribution")?;
    let mut state = SimState::new(f_e, f_i, efield, time)?;
    state.step = step;
    Ok(Checkpoint { state, inflow, config_digest })
}

// ---------------------------------------------------------------------- sinks

/// Writes a run's outputs into a directory.
pub struct DirectorySinks {
    pub dir: PathBuf,
    pub series: TimeSeriesWriter,
    pub inflow: InflowCache,
    pub config_digest: String,
    pub snapshots_written: usize,
    pub last_checkpoint: Option<PathBuf>,
}

impl DirectorySinks {
    /// `resume` appends to an existing time series instead of starting one.
    pub fn new(dir: &Path, inflow: InflowCache, config_digest: String, resume: bool) -> Result<Self> {
        fs::create_dir_all(dir).map_err(|e| SheathError::io(dir, e))?;
        let path = dir.join(TIMESERIES_FILE);
        let series = if resume { TimeSeriesWriter::append(&path)? } else { TimeSeriesWriter::create(&path)? };
        Ok(DirectorySinks { dir: dir.to_path_buf(), series, inflow, config_digest, snapshots_written: 0, last_checkpoint: None })
    }

    pub fn finish(&mut self) -> Result<()> {
        self.series.flush()
    }
}

impl RunSinks for DirectorySinks {
    fn record(&mut self, record: &DiagnosticsRecord) -> Result<()> {
        self.series.write(record)
    }

    fn snapshot(&mut self, state: &SimState) -> Result<()> {
        write_snapshot(&self.dir, state)?;
        self.snapshots_written += 1;
        Ok(())
    }

    fn checkpoint(&mut self, state: &SimState) -> Result<()> {
        self.series.flush()?;
        let path = checkpoint_path(&self.dir, state.step);
        let ck = Checkpoint { state: state.clone(), inflow: self.inflow.clone(), config_digest: self.config_digest.clone() };
        write_checkpoint(&path, &ck)?;
        log::info!("checkpoint written to {}", path.display());
        self.last_checkpoint = Some(path);
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::sample_function;

    fn state() -> SimState {
        let ge = make_phase_grid(6, 5, -3.0, 4.0).unwrap();
        let gi = make_phase_grid(6, 4, -1.0, 1.0).unwrap();
        let f = |x: f64, v: f64| (x * 3.1).sin() / 7.0 + v.exp() * 1e-300 + 1.0 / 3.0;
        let mut s = SimState::new(
            sample_function(&ge, f).unwrap(),
            sample_function(&gi, |x, v| x - v / 3.0).unwrap(),
            (0..7).map(|i| (i as f64 * 0.7).cos() / 3.0).collect(),
            0.01,
        )
        .unwrap();
        s.step = 100;
        s
    }

    #[test]
    fn float_format_round_trips() {
        for x in [1.0 / 3.0, -2.7839395640524267, 1e-300, 5e-324, f64::MAX, 0.1 + 0.2, -0.0] {
            assert_eq!(num(x).parse::<f64>().unwrap().to_bits(), x.to_bits());
        }
    }

    #[test]
    fn snapshot_round_trip_is_bit_exact() {
        let dir = tempfile::tempdir().unwrap();
        let s = state();
        write_snapshot(dir.path(), &s).unwrap();
        let (pe, _, _) = snapshot_paths(dir.path(), s.time);
        assert!(pe.ends_with("electrons_t0000.010000.txt"), "{}", pe.display());
        let back = read_snapshot(&pe).unwrap();
        assert_eq!(back, s);
        assert_eq!(list_snapshots(dir.path()).unwrap(), vec![pe]);
    }

    #[test]
    fn checkpoint_round_trip_is_bit_exact() {
        let dir = tempfile::tempdir().unwrap();
        let s = state();
        let ck = Checkpoint { inflow: InflowCache::from_initial(&s), state: s, config_digest: "abc123".into() };
        let path = checkpoint_path(dir.path(), 100);
        write_checkpoint(&path, &ck).unwrap();
        assert_eq!(read_checkpoint(&path).unwrap(), ck);
    }

    #[test]
    fn truncated_checkpoint_is_an_error() {
        let dir = tempfile::tempdir().unwrap();
        let s = state();
        let ck = Checkpoint { inflow: InflowCache::from_initial(&s), state: s, config_digest: "x".into() };
        let path = dir.path().join("ck.txt");
        write_checkpoint(&path, &ck).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        let cut: Vec<&str> = text.lines().collect();
        fs::write(&path, cut[..cut.len() - 2].join("\n")).unwrap();
        assert!(read_checkpoint(&path).is_err());
    }

    #[test]
    fn timeseries_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join(TIMESERIES_FILE);
        let r = DiagnosticsRecord::from_state(&state());
        write_timeseries(&path, &[r, r]).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        assert_eq!(text.lines().next().unwrap(), TIMESERIES_HEADER);
        assert_eq!(read_timeseries(&path).unwrap(), vec![r, r]);
    }

    #[test]
    fn equilibrium_round_trip() {
        let n = 4;
        let eq = EquilibriumSolution {
            params: PhysicalParams::default(),
            phi: (0..=n).map(|i| -(i as f64) / 3.0).collect(),
            phi_w: -4.0 / 3.0,
            n0: 0.5019,
            efield: vec![1.0 / 3.0; n + 1],
            grid_n: n,
            monotone: true,
        };
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join(EQUILIBRIUM_FILE);
        write_equilibrium(&path, &eq).unwrap();
        assert_eq!(read_equilibrium(&path).unwrap(), eq);
    }

    #[test]
    fn missing_file_names_path() {
        let err = read_equilibrium(Path::new("/nonexistent/eq.txt")).unwrap_err();
        assert!(err.to_string().contains("/nonexistent/eq.txt"), "{err}");
    }
}

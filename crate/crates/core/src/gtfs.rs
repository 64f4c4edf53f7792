//! Ingestion of a GTFS-like subset (stops, trips, stop_times as CSV with
//! header rows) into a [`PTNetwork`], concatenating trips into vehicle
//! routes and sampling unit capacities from a caller-supplied
//! distribution.

use std::collections::{BTreeMap, HashMap};
use std::path::Path;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::GtfsError;
use crate::model::{PTNetwork, Stop, Time, VehicleRoute};

/// Capacity type distribution: `(unit_capacity, probability)` pairs.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CapacityDistribution {
    pub choices: Vec<(f64, f64)>,
}

impl CapacityDistribution {
    /// Case-study defaults: capacities {870, 912, 936} with probabilities
    /// {0.52, 0.13, 0.35}.
    pub fn case_study() -> Self {
        CapacityDistribution { choices: vec![(870.0, 0.52), (912.0, 0.13), (936.0, 0.35)] }
    }

    pub fn sample(&self, rng: &mut impl Rng) -> Result<f64, GtfsError> {
        let total: f64 = self.choices.iter().map(|(_, p)| p).sum();
        if total <= 0.0 || self.choices.iter().any(|(_, p)| *p < 0.0) {
            return Err(GtfsError::BadDistribution);
        }
        let mut draw = rng.gen_range(0.0..total);
        for &(cap, p) in &self.choices {
            if draw < p {
                return Ok(cap);
            }
            draw -= p;
        }
        Ok(self.choices.last().unwrap().0)
    }
}

#[derive(Debug, Clone)]
pub struct GtfsConfig {
    /// Planning window `[start, end]` in seconds; stop events outside are dropped.
    pub window: (Time, Time),
    /// Stop ids acting as freight terminals.
    pub terminals: Vec<String>,
    pub capacity: CapacityDistribution,
    /// Units per vehicle.
    pub units: u32,
    /// Seed for the capacity type assignment.
    pub seed: u64,
}

#[derive(Debug, Clone)]
struct Trip {
    /// (stop index, arrival) ordered by stop sequence.
    stops: Vec<(usize, Time)>,
}

/// Reads `stops`, `trips` and `stop_times` tables from `dir` (either bare
/// names or with a `.txt` extension) and produces a network whose routes
/// are maximal trip concatenations: trip B continues trip A iff A ends at
/// the stop where B starts and no other trip starts or ends at that stop
/// strictly between A's end and B's start.
pub fn ingest_gtfs_subset(dir: impl AsRef<Path>, config: &GtfsConfig) -> Result<PTNetwork, GtfsError> {
    let dir = dir.as_ref();
    if config.window.0 >= config.window.1 {
        return Err(GtfsError::EmptyWindow);
    }

    let stops_path = table_path(dir, "stops")?;
    let trips_path = table_path(dir, "trips")?;
    let stop_times_path = table_path(dir, "stop_times")?;

    let mut stops: Vec<Stop> = Vec::new();
    let mut stop_index: HashMap<String, usize> = HashMap::new();
    {
        let mut rdr = csv::Reader::from_path(&stops_path)
            .map_err(|e| GtfsError::Csv { table: "stops", source: e })?;
        let headers = rdr
            .headers()
            .map_err(|e| GtfsError::Csv { table: "stops", source: e })?
            .clone();
        let col = |name: &str| headers.iter().position(|h| h.trim() == name);
        let id_col = col("stop_id").or_else(|| col("id")).ok_or(GtfsError::Parse {
            table: "stops",
            row: 0,
            reason: "missing stop_id column".into(),
        })?;
        let x_col = col("x").or_else(|| col("stop_lon")).or_else(|| col("lon"));
        let y_col = col("y").or_else(|| col("stop_lat")).or_else(|| col("lat"));
        for (rownum, rec) in rdr.records().enumerate() {
            let rec = rec.map_err(|e| GtfsError::Csv { table: "stops", source: e })?;
            let id = rec
                .get(id_col)
                .ok_or(GtfsError::Parse { table: "stops", row: rownum + 1, reason: "short row".into() })?
                .trim()
                .to_string();
            let parse = |c: Option<usize>| -> Result<f64, GtfsError> {
                match c.and_then(|c| rec.get(c)) {
                    Some(v) => v.trim().parse().map_err(|_| GtfsError::Parse {
                        table: "stops",
                        row: rownum + 1,
                        reason: format!("bad coordinate {v:?}"),
                    }),
                    None => Ok(0.0),
                }
            };
            let x = parse(x_col)?;
            let y = parse(y_col)?;
            stop_index.insert(id.clone(), stops.len());
            stops.push(Stop { id, x, y });
        }
    }

    let mut trip_ids: Vec<String> = Vec::new();
    {
        let mut rdr = csv::Reader::from_path(&trips_path)
            .map_err(|e| GtfsError::Csv { table: "trips", source: e })?;
        let headers = rdr
            .headers()
            .map_err(|e| GtfsError::Csv { table: "trips", source: e })?
            .clone();
        let id_col = headers
            .iter()
            .position(|h| h.trim() == "trip_id" || h.trim() == "id")
            .ok_or(GtfsError::Parse { table: "trips", row: 0, reason: "missing trip_id column".into() })?;
        for (rownum, rec) in rdr.records().enumerate() {
            let rec = rec.map_err(|e| GtfsError::Csv { table: "trips", source: e })?;
            let id = rec
                .get(id_col)
                .ok_or(GtfsError::Parse { table: "trips", row: rownum + 1, reason: "short row".into() })?
                .trim()
                .to_string();
            trip_ids.push(id);
        }
    }

    let mut by_trip: HashMap<String, Vec<(u64, usize, Time)>> = HashMap::new();
    {
        let mut rdr = csv::Reader::from_path(&stop_times_path)
            .map_err(|e| GtfsError::Csv { table: "stop_times", source: e })?;
        let headers = rdr
            .headers()
            .map_err(|e| GtfsError::Csv { table: "stop_times", source: e })?
            .clone();
        let col = |name: &str| headers.iter().position(|h| h.trim() == name);
        let trip_col = col("trip_id").ok_or(GtfsError::Parse { table: "stop_times", row: 0, reason: "missing trip_id".into() })?;
        let stop_col = col("stop_id").ok_or(GtfsError::Parse { table: "stop_times", row: 0, reason: "missing stop_id".into() })?;
        let arr_col = col("arrival").or_else(|| col("arrival_seconds")).or_else(|| col("arrival_time")).ok_or(
            GtfsError::Parse { table: "stop_times", row: 0, reason: "missing arrival column".into() },
        )?;
        let seq_col = col("sequence").or_else(|| col("stop_sequence")).ok_or(GtfsError::Parse {
            table: "stop_times",
            row: 0,
            reason: "missing sequence column".into(),
        })?;
        for (rownum, rec) in rdr.records().enumerate() {
            let rec = rec.map_err(|e| GtfsError::Csv { table: "stop_times", source: e })?;
            let trip = rec.get(trip_col).unwrap_or("").trim().to_string();
            let stop = rec.get(stop_col).unwrap_or("").trim().to_string();
            let arrival: Time = rec
                .get(arr_col)
                .unwrap_or("")
                .trim()
                .parse()
                .map_err(|_| GtfsError::Parse { table: "stop_times", row: rownum + 1, reason: "bad arrival".into() })?;
            let seq: u64 = rec
                .get(seq_col)
                .unwrap_or("")
                .trim()
                .parse()
                .map_err(|_| GtfsError::Parse { table: "stop_times", row: rownum + 1, reason: "bad sequence".into() })?;
            let stop_idx = *stop_index
                .get(&stop)
                .ok_or(GtfsError::Dangling { table: "stop_times", kind: "stop", id: stop.clone() })?;
            if !by_trip.contains_key(&trip) && !trip_ids.contains(&trip) {
                return Err(GtfsError::Dangling { table: "stop_times", kind: "trip", id: trip });
            }
            by_trip.entry(trip).or_default().push((seq, stop_idx, arrival));
        }
    }

    let mut trips: Vec<Trip> = Vec::new();
    for id in &trip_ids {
        let mut events = by_trip.remove(id).unwrap_or_default();
        events.sort_by_key(|&(seq, _, _)| seq);
        let stops_seq: Vec<(usize, Time)> = events
            .into_iter()
            .map(|(_, s, t)| (s, t))
            .filter(|&(_, t)| t >= config.window.0 && t <= config.window.1)
            .collect();
        if stops_seq.len() >= 2 {
            trips.push(Trip { stops: stops_seq });
        }
    }

    let chains = concatenate_trips(&trips);

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut routes = Vec::new();
    for (v, chain) in chains.iter().enumerate() {
        let mut seq: Vec<(String, Time)> = Vec::new();
        for &trip_idx in chain {
            for &(s, t) in &trips[trip_idx].stops {
                // Merge dwells: a continued trip starts at the stop where
                // the previous one ended.
                if seq.last().map(|(ps, _)| *ps == stops[s].id).unwrap_or(false) {
                    continue;
                }
                seq.push((stops[s].id.clone(), t));
            }
        }
        let capacity = config.capacity.sample(&mut rng)?;
        routes.push(VehicleRoute { id: format!("v{}", v + 1), stops: seq, units: config.units, unit_capacity: capacity });
    }

    Ok(PTNetwork::new(stops, config.terminals.clone(), routes))
}

/// Chains trips into vehicles. Every trip belongs to exactly one chain.
fn concatenate_trips(trips: &[Trip]) -> Vec<Vec<usize>> {
    #[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
    enum EventKind {
        End,
        Start,
    }
    // Events per stop: (time, kind, trip index), sorted.
    let mut events: BTreeMap<usize, Vec<(Time, EventKind, usize)>> = BTreeMap::new();
    for (i, trip) in trips.iter().enumerate() {
        let (s0, t0) = trip.stops[0];
        let (s1, t1) = *trip.stops.last().unwrap();
        events.entry(s0).or_default().push((t0, EventKind::Start, i));
        events.entry(s1).or_default().push((t1, EventKind::End, i));
    }
    for list in events.values_mut() {
        list.sort();
    }

    // successor[a] = b iff trip b continues trip a.
    let mut successor: Vec<Option<usize>> = vec![None; trips.len()];
    let mut claimed: Vec<bool> = vec![false; trips.len()];
    for (i, trip) in trips.iter().enumerate() {
        let (end_stop, end_time) = *trip.stops.last().unwrap();
        let list = &events[&end_stop];
        // Candidate: earliest start at this stop at or after the end, with
        // no other trip's start or end strictly in between.
        let mut candidate: Option<(Time, usize)> = None;
        let mut blocker: Option<Time> = None;
        for &(t, kind, j) in list {
            if t < end_time || j == i {
                continue;
            }
            match kind {
                EventKind::Start => {
                    if !claimed[j] && trips[j].stops[0].0 == end_stop {
                        match candidate {
                            None => candidate = Some((t, j)),
                            Some((ct, cj)) if t < ct || (t == ct && j < cj) => candidate = Some((t, j)),
                            _ => {}
                        }
                    } else if blocker.map(|b| t < b).unwrap_or(true) && t > end_time {
                        // A start we cannot take still blocks later candidates.
                        blocker = Some(t);
                    }
                }
                EventKind::End => {
                    if t > end_time && blocker.map(|b| t < b).unwrap_or(true) {
                        blocker = Some(t);
                    }
                }
            }
        }
        if let Some((t, j)) = candidate {
            let blocked = blocker.map(|b| b < t).unwrap_or(false);
            if !blocked {
                successor[i] = Some(j);
                claimed[j] = true;
            }
        }
    }

    let mut chains = Vec::new();
    for i in 0..trips.len() {
        if claimed[i] {
            continue; // not a chain head
        }
        let mut chain = vec![i];
        let mut cur = i;
        while let Some(next) = successor[cur] {
            chain.push(next);
            cur = next;
        }
        chains.push(chain);
    }
    chains
}

fn table_path(dir: &Path, name: &'static str) -> Result<std::path::PathBuf, GtfsError> {
    for candidate in [dir.join(name), dir.join(format!("{name}.txt")), dir.join(format!("{name}.csv"))] {
        if candidate.exists() {
            return Ok(candidate);
        }
    }
    Err(GtfsError::MissingTable { name, dir: dir.display().to_string() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write_tables(dir: &Path, stop_times: &str, trips: &str) {
        let mut f = std::fs::File::create(dir.join("stops.txt")).unwrap();
        writeln!(f, "stop_id,x,y").unwrap();
        for s in ["a", "b", "c", "d"] {
            writeln!(f, "{s},0,0").unwrap();
        }
        std::fs::write(dir.join("trips.txt"), trips).unwrap();
        std::fs::write(dir.join("stop_times.txt"), stop_times).unwrap();
    }

    fn config() -> GtfsConfig {
        GtfsConfig {
            window: (0, 10_000),
            terminals: vec![],
            capacity: CapacityDistribution { choices: vec![(100.0, 1.0)] },
            units: 1,
            seed: 7,
        }
    }

    #[test]
    fn clean_handover_concatenates() {
        let dir = tempfile::tempdir().unwrap();
        write_tables(
            dir.path(),
            "trip_id,stop_id,arrival,sequence\nA,a,0,1\nA,b,100,2\nB,b,200,1\nB,c,300,2\n",
            "trip_id\nA\nB\n",
        );
        let network = ingest_gtfs_subset(dir.path(), &config()).unwrap();
        assert_eq!(network.routes.len(), 1);
        assert_eq!(network.routes[0].stops.len(), 3); // |A| + |B| - 1
    }

    #[test]
    fn interleaving_end_blocks_concatenation() {
        // Trip C ends at b between A's end (100) and B's start (300).
        let dir = tempfile::tempdir().unwrap();
        write_tables(
            dir.path(),
            "trip_id,stop_id,arrival,sequence\nA,a,0,1\nA,b,100,2\nB,b,300,1\nB,c,400,2\nC,d,50,1\nC,b,200,2\n",
            "trip_id\nA\nB\nC\n",
        );
        let network = ingest_gtfs_subset(dir.path(), &config()).unwrap();
        // C itself ends at b at 200 with B starting at 300 and nothing in
        // between, so C-B concatenate; A stays alone.
        let lens: Vec<usize> = network.routes.iter().map(|r| r.stops.len()).collect();
        assert_eq!(network.routes.len(), 2, "routes: {lens:?}");
        assert!(lens.contains(&2)); // A alone
        assert!(lens.contains(&3)); // C + B
    }

    #[test]
    fn missing_table_reported() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("stops.txt"), "stop_id,x,y\n").unwrap();
        let err = ingest_gtfs_subset(dir.path(), &config()).unwrap_err();
        assert!(matches!(err, GtfsError::MissingTable { name: "trips", .. }));
    }

    #[test]
    fn capacity_sampling_matches_distribution() {
        let dist = CapacityDistribution { choices: vec![(870.0, 0.52), (910.0, 0.13), (936.0, 0.35)] };
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let mut counts = [0usize; 3];
        let n = 10_000;
        for _ in 0..n {
            let c = dist.sample(&mut rng).unwrap();
            let idx = dist.choices.iter().position(|&(cap, _)| cap == c).unwrap();
            counts[idx] += 1;
        }
        for (i, &(_, p)) in dist.choices.iter().enumerate() {
            let freq = counts[i] as f64 / n as f64;
            assert!((freq - p).abs() <= 0.02, "cap {i}: {freq} vs {p}");
        }
    }
}

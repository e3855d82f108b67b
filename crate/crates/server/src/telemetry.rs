//! Per-session interaction log in the study-data CSV layout.
//!
//! A session's log is a sequence of segments. `beginTask` opens a task
//! segment and `endTask` closes it into a row; interactions outside any task
//! go to an untitled segment that is written as a row with an empty task id
//! once it has counted something. Each accepted command counts once.

use multilayout_core::scene::Command;
use serde::{Deserialize, Serialize};

pub const CSV_HEADER: [&str; 13] = [
    "condition",
    "graphID",
    "taskID",
    "startTime",
    "endTime",
    "duration",
    "correctAnswerProvided",
    "numberOfInteractions",
    "numberOfExpansions",
    "numberOfProjections",
    "numberOfOverviews",
    "numberOfSphericalViews",
    "accuracy",
];

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counters {
    pub interactions: u32,
    pub expansions: u32,
    pub projections: u32,
    pub overviews: u32,
    pub spherical_views: u32,
}

impl Counters {
    fn is_empty(&self) -> bool {
        *self == Counters::default()
    }
}

/// One CSV row. Times are UNIX seconds.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TaskRow {
    pub condition: String,
    #[serde(rename = "graphID")]
    pub graph_id: String,
    #[serde(rename = "taskID")]
    pub task_id: String,
    #[serde(rename = "startTime")]
    pub start_time: f64,
    #[serde(rename = "endTime")]
    pub end_time: f64,
    pub duration: f64,
    #[serde(rename = "correctAnswerProvided")]
    pub correct_answer_provided: bool,
    #[serde(rename = "numberOfInteractions")]
    pub number_of_interactions: u32,
    #[serde(rename = "numberOfExpansions")]
    pub number_of_expansions: u32,
    #[serde(rename = "numberOfProjections")]
    pub number_of_projections: u32,
    #[serde(rename = "numberOfOverviews")]
    pub number_of_overviews: u32,
    #[serde(rename = "numberOfSphericalViews")]
    pub number_of_spherical_views: u32,
    pub accuracy: f64,
}

#[derive(Clone, Debug, PartialEq)]
struct Segment {
    task_id: Option<String>,
    start: f64,
    counters: Counters,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SessionLog {
    condition: String,
    graph_id: String,
    rows: Vec<TaskRow>,
    current: Segment,
}

impl SessionLog {
    pub fn new(condition: impl Into<String>, now: f64) -> Self {
        SessionLog {
            condition: condition.into(),
            graph_id: String::new(),
            rows: Vec::new(),
            current: Segment {
                task_id: None,
                start: now,
                counters: Counters::default(),
            },
        }
    }

    pub fn set_graph(&mut self, graph_id: impl Into<String>) {
        self.graph_id = graph_id.into();
    }

    /// Counters of the open segment.
    pub fn counters(&self) -> Counters {
        self.current.counters
    }

    pub fn rows(&self) -> &[TaskRow] {
        &self.rows
    }

    /// Counts an accepted scene command.
    pub fn record(&mut self, cmd: &Command) {
        let c = &mut self.current.counters;
        c.interactions += 1;
        match cmd {
            Command::ExpandCommunity { .. } => c.expansions += 1,
            Command::ProjectCommunity { .. } => c.projections += 1,
            Command::ShowOverview => c.overviews += 1,
            Command::ExpandNetwork => c.spherical_views += 1,
            _ => {}
        }
    }

    fn row(&self, seg: &Segment, end: f64, correct: bool, accuracy: f64) -> TaskRow {
        let c = seg.counters;
        TaskRow {
            condition: self.condition.clone(),
            graph_id: self.graph_id.clone(),
            task_id: seg.task_id.clone().unwrap_or_default(),
            start_time: seg.start,
            end_time: end,
            duration: (end - seg.start).max(0.0),
            correct_answer_provided: correct,
            number_of_interactions: c.interactions,
            number_of_expansions: c.expansions,
            number_of_projections: c.projections,
            number_of_overviews: c.overviews,
            number_of_spherical_views: c.spherical_views,
            accuracy,
        }
    }

    fn close(&mut self, now: f64, correct: bool, accuracy: f64, next: Option<String>) {
        let seg = std::mem::replace(
            &mut self.current,
            Segment {
                task_id: next,
                start: now,
                counters: Counters::default(),
            },
        );
        if seg.task_id.is_some() || !seg.counters.is_empty() {
            let row = self.row(&seg, now, correct, accuracy);
            self.rows.push(row);
        }
    }

    /// Opens a task. A task still open is closed as unanswered.
    pub fn begin_task(&mut self, task_id: impl Into<String>, now: f64) {
        self.close(now, false, 0.0, Some(task_id.into()));
    }

    pub fn end_task(&mut self, correct: bool, accuracy: f64, now: f64) -> Result<&TaskRow, String> {
        if self.current.task_id.is_none() {
            return Err("no task is open".into());
        }
        if !(0.0..=1.0).contains(&accuracy) {
            return Err(format!("accuracy {accuracy} outside [0, 1]"));
        }
        self.close(now, correct, accuracy, None);
        Ok(self.rows.last().expect("task row pushed"))
    }

    /// All rows so far, plus the open segment as if it ended `now`.
    pub fn snapshot(&self, now: f64) -> Vec<TaskRow> {
        let mut rows = self.rows.clone();
        if self.current.task_id.is_some() || !self.current.counters.is_empty() {
            rows.push(self.row(&self.current, now, false, 0.0));
        }
        rows
    }

    pub fn to_csv(&self, now: f64) -> String {
        let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
        w.write_record(CSV_HEADER).expect("in-memory write");
        for row in self.snapshot(now) {
            w.serialize(row).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv is utf-8")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use multilayout_core::CommunityId;

    fn expand(c: u32) -> Command {
        Command::ExpandCommunity {
            community: CommunityId(c),
        }
    }

    #[test]
    fn fresh_log_is_header_only() {
        let log = SessionLog::new("MULTI", 0.0);
        assert_eq!(log.counters(), Counters::default());
        assert_eq!(log.to_csv(1.0), format!("{}\n", CSV_HEADER.join(",")));
    }

    #[test]
    fn counts_by_type() {
        let mut log = SessionLog::new("MULTI", 100.0);
        log.set_graph("medium");
        log.begin_task("T1", 100.0);
        for cmd in [Command::ExpandNetwork, expand(1), expand(2), expand(3)] {
            log.record(&cmd);
        }
        log.record(&Command::ProjectCommunity {
            community: CommunityId(3),
        });
        let row = log.end_task(true, 1.0, 112.5).unwrap().clone();
        assert_eq!(row.number_of_expansions, 3);
        assert_eq!(row.number_of_projections, 1);
        assert_eq!(row.number_of_spherical_views, 1);
        assert_eq!(row.number_of_interactions, 5);
        assert_eq!(row.duration, 12.5);
        let csv = log.to_csv(113.0);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], CSV_HEADER.join(","));
        assert_eq!(lines[1], "MULTI,medium,T1,100.0,112.5,12.5,true,5,3,1,0,1,1.0");
        assert_eq!(lines.len(), 2);
    }

    #[test]
    fn untitled_activity_becomes_a_row() {
        let mut log = SessionLog::new("MULTI", 0.0);
        log.record(&Command::ShowOverview);
        assert_eq!(log.snapshot(2.0)[0].task_id, "");
        log.begin_task("T2", 3.0);
        assert_eq!(log.rows().len(), 1);
        assert!(log.end_task(false, 2.0, 4.0).is_err());
    }
}

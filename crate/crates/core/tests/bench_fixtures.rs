use std::path::{Path, PathBuf};

use depth_eval::bench::{
    average_rank, emit_report, improvement_ratio, load_table, mean_ranks, task_rank, ReportFormat,
    ResultTable, TableFormat,
};
use depth_eval::Error;

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("data")
        .join(name)
}

fn table(name: &str) -> ResultTable {
    let p = data(name);
    load_table(&p, TableFormat::from_path(&p), None).unwrap()
}

#[test]
fn depth_completion_fixture_shape() {
    let t = table("depth_completion.csv");
    assert_eq!(t.task, "depth_completion");
    assert_eq!(t.columns.len(), 10);
    assert_eq!(t.rows.len(), 9);
    assert_eq!(t.baseline, "w/o depth");
    assert!((improvement_ratio(&t, "DAV2-Rel").unwrap() - 9.26).abs() <= 0.01);
    assert_eq!(improvement_ratio(&t, "w/o depth").unwrap(), 0.0);
    assert_eq!(task_rank(&t).unwrap()["Metric3DV2"], 8);
}

#[test]
fn stereo_ranks() {
    let r = task_rank(&table("stereo_matching.csv")).unwrap();
    assert_eq!((r["DAV2-Rel"], r["MoGe"], r["UniDepth"]), (1, 2, 8));
}

#[test]
fn view_synthesis_ranks_and_midas() {
    let t = table("novel_view_synthesis.csv");
    assert!((improvement_ratio(&t, "Midas").unwrap() - 5.24).abs() <= 0.02);
    assert!((improvement_ratio(&t, "DAV2-Met").unwrap() - 4.81).abs() <= 0.02);
    let r = task_rank(&t).unwrap();
    let order = [
        "Midas",
        "DAV2-Met",
        "DAV2-Rel",
        "GenPercept",
        "Metric3DV2",
        "UniDepth",
        "MoGe",
        "Marigold",
    ];
    for (i, m) in order.iter().enumerate() {
        assert_eq!(r[*m], i + 1, "{m}");
    }
}

#[test]
fn slam_fixture_exclusions() {
    let t = table("slam.json");
    assert_eq!(t.columns.len(), 16);
    assert_eq!(t.excluded, vec!["Metric3DV2", "Rendered"]);
    let r = task_rank(&t).unwrap();
    assert_eq!(r.len(), 7);
    assert!(!r.contains_key("Metric3DV2") && !r.contains_key("Rendered"));
}

#[test]
fn vlm_fixtures_load_with_their_baselines() {
    for (name, base) in [
        ("vlm_gpt4o.csv", "ChatGPT-4o"),
        ("vlm_spatialbot.csv", "SpatialBot"),
    ] {
        let p = data(name);
        assert!(matches!(
            load_table(&p, TableFormat::Csv, None),
            Err(Error::InvalidArgument(_))
        ));
        let t = load_table(&p, TableFormat::Csv, Some(base)).unwrap();
        assert_eq!(t.rows.len(), 9);
        assert_eq!(t.columns.len(), 5);
    }
}

#[test]
fn published_task_ranks_average_as_published() {
    // per-task ranks as printed, in task order; Metric3DV2 is excluded from the last task
    let printed: [(&str, [Option<usize>; 4], &str); 8] = [
        ("Midas", [Some(4), Some(7), Some(1), Some(5)], "4.25"),
        ("DAV2-Rel", [Some(1), Some(1), Some(3), Some(1)], "1.50"),
        ("DAV2-Met", [Some(2), Some(5), Some(2), Some(6)], "3.75"),
        ("Metric3DV2", [Some(8), Some(6), Some(5), None], "6.33"),
        ("UniDepth", [Some(5), Some(8), Some(6), Some(2)], "5.25"),
        ("Marigold", [Some(6), Some(4), Some(8), Some(4)], "5.50"),
        ("GenPercept", [Some(3), Some(3), Some(4), Some(3)], "3.25"),
        ("MoGe", [Some(7), Some(2), Some(7), Some(7)], "5.75"),
    ];
    let tasks = (0..4).map(|k| {
        printed
            .iter()
            .filter_map(move |(m, r, _)| r[k].map(|r| (*m, r)))
            .collect::<Vec<_>>()
    });
    let (avg, counts) = mean_ranks(tasks);
    for (m, _, want) in printed {
        assert_eq!(format!("{:.2}", avg[m]), want, "{m}");
    }
    assert_eq!(counts["Metric3DV2"], 3);
}

#[test]
fn four_task_report_renders() {
    let tables = [
        "depth_completion.csv",
        "stereo_matching.csv",
        "novel_view_synthesis.csv",
        "slam.json",
    ]
    .map(table);
    let report = average_rank(&tables).unwrap();
    assert_eq!(report.average_rank.len(), 8);
    assert_eq!(report.tasks_counted["Metric3DV2"], 3);
    assert_eq!(report.tasks_counted["DAV2-Rel"], 4);
    assert!(report.per_task["slam"]["Rendered"].rank.is_none());
    let md = emit_report(&report, ReportFormat::Markdown).unwrap();
    assert_eq!(md.matches("\n## ").count(), 4);
}

#[test]
fn json_round_trip_through_load() {
    let dir = tempfile::tempdir().unwrap();
    let t = table("stereo_matching.csv");
    let p = dir.path().join("t.json");
    std::fs::write(&p, serde_json::to_string(&t).unwrap()).unwrap();
    assert_eq!(load_table(&p, TableFormat::Json, None).unwrap(), t);
}

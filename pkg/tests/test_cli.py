import json

import pandas as pd
import pytest

from src.cli import EXIT_CAP, EXIT_USAGE, build_parser, main


@pytest.fixture
def square_file(tmp_path):
    path = tmp_path / "square.txt"
    path.write_text("RUL\n", encoding="utf-8")
    return str(path)


def read_json(path):
    return json.loads(path.read_text(encoding="utf-8"))


def test_enumerate_writes_databank(tmp_path):
    out = tmp_path / "run"
    assert main(["enumerate", "--n", "4", "--out", str(out)]) == 0
    bank = pd.read_csv(out / "databank.csv")
    assert len(bank) == 5
    manifest = read_json(out / "manifest.json")
    assert manifest["command"] == "enumerate"
    assert manifest["outputs"] == ["databank.csv"]
    assert manifest["parameters"]["n"] == 4


def test_enumerate_with_designability(tmp_path):
    out = tmp_path / "run"
    assert main(["enumerate", "--n", "4", "--designability", "--out", str(out)]) == 0
    ranking = pd.read_csv(out / "ranking.csv")
    assert ranking.loc[0, "canonical_moves"] == "RUL"
    assert ranking.loc[0, "designability_count"] == 4
    assert ranking["rank"].tolist() == list(range(1, 6))
    bank = pd.read_csv(out / "databank.csv")
    assert bank["designability_count"].sum() == 4


def test_enumerate_over_the_cap(tmp_path):
    assert main(["enumerate", "--n", "99", "--out", str(tmp_path)]) == EXIT_CAP


def test_enumerate_needs_length(tmp_path):
    assert main(["enumerate", "--out", str(tmp_path)]) == EXIT_USAGE


def test_bad_choice_exits_with_usage_code(tmp_path):
    with pytest.raises(SystemExit) as info:
        main(["design", "--solver", "qpu", "--out", str(tmp_path)])
    assert info.value.code == EXIT_USAGE


def test_design_report(tmp_path, square_file):
    out = tmp_path / "run"
    code = main(["design", "--structure", square_file, "--nh", "2", "--lambda", "1.1", "--out", str(out)])
    assert code == 0
    report = read_json(out / "design_report.json")
    assert report["target"] == "RUL"
    assert report["lambda"] == "1.1"
    assert report["candidates"] == [{"ehp": -1, "sequence": "HPPH", "verdict": "UNIQUE_GS"}]


def test_design_report_is_byte_identical_across_runs(tmp_path, square_file):
    args = ["design", "--structure", square_file, "--nh", "2", "--solver", "sa", "--budget", "3",
            "--sa-steps", "1000", "--seed", "7"]
    assert main(args + ["--out", str(tmp_path / "a")]) == 0
    assert main(args + ["--out", str(tmp_path / "b")]) == 0
    first = (tmp_path / "a" / "design_report.json").read_bytes()
    assert first == (tmp_path / "b" / "design_report.json").read_bytes()


def test_design_needs_a_target(tmp_path):
    assert main(["design", "--nh", "2", "--out", str(tmp_path)]) == EXIT_USAGE


def test_design_rejects_bad_structure_file(tmp_path):
    path = tmp_path / "bad.txt"
    path.write_text("RLR\n", encoding="utf-8")
    assert main(["design", "--structure", str(path), "--nh", "1", "--out", str(tmp_path)]) == EXIT_USAGE


def test_design_solver_cap(tmp_path):
    path = tmp_path / "long.txt"
    path.write_text("R" * 20 + "\n", encoding="utf-8")
    code = main(["design", "--structure", str(path), "--nh", "5", "--solver", "schrodinger", "--out", str(tmp_path)])
    assert code == EXIT_CAP


def test_config_file_sets_defaults(tmp_path, square_file):
    config = tmp_path / "run.cfg"
    config.write_text(f"# square run\nstructure = {square_file}\nnh = 2\nlambda = 1.1\n", encoding="utf-8")
    out = tmp_path / "run"
    assert main(["--config", str(config), "design", "--out", str(out)]) == 0
    assert read_json(out / "design_report.json")["lambda"] == "1.1"


def test_flags_override_config_file(tmp_path, square_file):
    config = tmp_path / "run.cfg"
    config.write_text(f"structure = {square_file}\nnh = 2\nlambda = 1.1\n", encoding="utf-8")
    out = tmp_path / "run"
    assert main(["--config", str(config), "design", "--lambda", "2.5", "--out", str(out)]) == 0
    assert read_json(out / "design_report.json")["lambda"] == "2.5"


def test_broken_config_file(tmp_path):
    config = tmp_path / "run.cfg"
    config.write_text("just words\n", encoding="utf-8")
    assert main(["--config", str(config), "enumerate", "--n", "4", "--out", str(tmp_path)]) == EXIT_USAGE


def test_seed_from_environment(tmp_path, monkeypatch):
    monkeypatch.setenv("HPDESIGN_SEED", "99")
    out = tmp_path / "run"
    assert main(["enumerate", "--n", "3", "--out", str(out)]) == 0
    assert read_json(out / "manifest.json")["seed"] == 99


def test_simulate_outputs(tmp_path, square_file):
    out = tmp_path / "run"
    code = main([
        "simulate", "--structure", square_file, "--nh", "2", "--lambda", "1.1", "--tf", "5", "--eps", "0.05",
        "--trace", "--trace-every", "10", "--reads", "20", "--out", str(out),
    ])
    assert code == 0
    result = read_json(out / "simulate.json")
    assert result["ground_states"] == ["HPPH"]
    assert 0.0 <= result["P_g"] <= 1.0
    assert len(pd.read_csv(out / "trace.csv")) == 10
    reads = pd.read_csv(out / "reads.csv")
    assert len(reads) == 20
    assert reads.loc[reads["sequence"] == "HPPH", "hit"].all()
    assert (out / "problem.ising").exists()


def test_simulate_from_exported_problem(tmp_path, square_file):
    first = tmp_path / "first"
    assert main(["simulate", "--structure", square_file, "--nh", "2", "--tf", "2", "--eps", "0.1",
                 "--out", str(first)]) == 0
    second = tmp_path / "second"
    assert main(["simulate", "--problem", str(first / "problem.ising"), "--tf", "2", "--eps", "0.1",
                 "--out", str(second)]) == 0
    assert read_json(first / "simulate.json")["P_g"] == pytest.approx(read_json(second / "simulate.json")["P_g"])


def test_simulate_xy_needs_composition(tmp_path):
    problem = tmp_path / "p.ising"
    problem.write_text("h 0 1\nh 1 -1\n", encoding="utf-8")
    code = main(["simulate", "--problem", str(problem), "--driver", "xy", "--out", str(tmp_path / "run")])
    assert code == EXIT_USAGE


def test_drop_penalty_only_with_xy(tmp_path, square_file):
    code = main(["simulate", "--structure", square_file, "--nh", "2", "--drop-penalty", "--out", str(tmp_path)])
    assert code == EXIT_USAGE


def test_chi_needs_three_step_sizes(tmp_path, square_file):
    code = main(["chi", "--structure", square_file, "--nh", "2", "--eps-list", "0.1", "--out", str(tmp_path)])
    assert code == EXIT_USAGE


def test_chi_table(tmp_path, square_file):
    out = tmp_path / "run"
    code = main(["chi", "--structure", square_file, "--nh", "2", "--tf", "2,4", "--eps-list", "0.2,0.1,0.05",
                 "--out", str(out)])
    assert code == 0
    table = pd.read_csv(out / "chi.csv")
    assert list(table.columns) == ["t_f", "eps", "P_g", "chi"]
    assert len(table) == 6
    assert table["chi"].notna().sum() == 2


def test_noise_single_point(tmp_path, square_file):
    out = tmp_path / "run"
    code = main(["noise", "--structure", square_file, "--nh", "2", "--samples", "200", "--out", str(out)])
    assert code == 0
    frame = pd.read_csv(out / "noise_sweep.csv")
    assert len(frame) == 1
    assert frame.loc[0, "system_id"] == "T4_NH2"
    assert frame.loc[0, "k"] == 2


def test_noise_jcs_sweep(tmp_path, square_file):
    out = tmp_path / "run"
    code = main(["noise", "--structure", square_file, "--nh", "2", "--samples", "200", "--sweep", "jcs",
                 "--jcs", "0.5,1,2", "--out", str(out)])
    assert code == 0
    assert pd.read_csv(out / "noise_sweep.csv")["j_cs"].tolist() == [0.5, 1.0, 2.0]


def test_noise_multiple_x_without_sweep(tmp_path, square_file):
    code = main(["noise", "--structure", square_file, "--nh", "2", "--x", "0.01,0.02", "--out", str(tmp_path)])
    assert code == EXIT_USAGE


def test_simulate_reports_lowest_levels(tmp_path, square_file):
    out = tmp_path / "run"
    assert main(["simulate", "--structure", square_file, "--nh", "2", "--lambda", "1.1", "--tf", "1", "--eps", "0.1",
                 "--out", str(out)]) == 0
    levels = read_json(out / "simulate.json")["levels"]
    assert levels == [{"count": 1, "energy": "-1"}, {"count": 5, "energy": "0"}, {"count": 2, "energy": "0.1"}]


def test_design_takes_composition_from_sequence_line(tmp_path):
    structure = tmp_path / "square.txt"
    structure.write_text("RUL\nHPPH\n", encoding="utf-8")
    out = tmp_path / "run"
    assert main(["design", "--structure", str(structure), "--lambda", "1.1", "--out", str(out)]) == 0
    report = read_json(out / "design_report.json")
    assert report["n_h"] == 2
    assert report["reference"] == {"ehp": -1, "sequence": "HPPH", "verdict": "UNIQUE_GS"}


def test_design_against_contact_map(tmp_path):
    cmap = tmp_path / "square.cmap"
    cmap.write_text("4\n0 3\n", encoding="utf-8")
    out = tmp_path / "run"
    assert main(["design", "--contact-map", str(cmap), "--nh", "2", "--lambda", "1.1", "--out", str(out)]) == 0
    report = read_json(out / "design_report.json")
    assert report["target"] is None
    assert report["n"] == 4
    assert (report["oracle_min_ehp"], report["oracle_degeneracy"]) == (-1, 1)
    assert report["candidates"] == [{"ehp": -1, "sequence": "HPPH", "verdict": "UNVERIFIED"}]


def test_design_rejects_bad_contact_map(tmp_path):
    cmap = tmp_path / "bad.cmap"
    cmap.write_text("4\n0 1\n", encoding="utf-8")
    assert main(["design", "--contact-map", str(cmap), "--nh", "2", "--out", str(tmp_path)]) == EXIT_USAGE


def test_design_takes_one_target(tmp_path, square_file):
    cmap = tmp_path / "square.cmap"
    cmap.write_text("4\n0 3\n", encoding="utf-8")
    code = main(["design", "--structure", square_file, "--contact-map", str(cmap), "--nh", "2",
                 "--out", str(tmp_path)])
    assert code == EXIT_USAGE


def test_simulate_over_annealing_times(tmp_path, square_file):
    out = tmp_path / "run"
    code = main(["simulate", "--structure", square_file, "--nh", "2", "--tf", "1,2", "--eps", "0.1",
                 "--out", str(out)])
    assert code == 0
    table = pd.read_csv(out / "p_g_sweep.csv")
    assert list(table.columns) == ["system_id", "n", "n_h", "t_f", "eps", "P_g"]
    assert table["system_id"].tolist() == ["T4_NH2", "T4_NH2"]
    assert table["t_f"].tolist() == [1.0, 2.0]
    assert table["P_g"].between(0, 1).all()
    assert read_json(out / "manifest.json")["outputs"] == ["p_g_sweep.csv"]


def test_simulate_over_benchmark_systems(tmp_path):
    out = tmp_path / "run"
    code = main(["simulate", "--sweep", "n", "--max-n", "10", "--tf", "1", "--eps", "0.1", "--out", str(out)])
    assert code == 0
    table = pd.read_csv(out / "p_g_sweep.csv")
    assert table["system_id"].tolist() == ["T10_NH4"]
    assert (table.loc[0, "n"], table.loc[0, "n_h"]) == (10, 4)


def test_simulate_sweep_has_no_trace(tmp_path, square_file):
    code = main(["simulate", "--structure", square_file, "--nh", "2", "--tf", "1,2", "--trace",
                 "--out", str(tmp_path)])
    assert code == EXIT_USAGE


def test_chi_ladder_reaches_fine_steps():
    parser, _ = build_parser()
    args = parser.parse_args(["chi"])
    ladder = [float(v) for v in args.eps_list.split(",")]
    assert ladder[-3:] == [0.0125, 0.00625, 0.003125]

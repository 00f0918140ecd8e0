import dataclasses
import json
import math

import numpy as np
import pytest

from depseries import montecarlo as mc
from depseries.errors import ValidationError
from depseries.report import (
    Report,
    equal_modulo_wall_time,
    from_json,
    plain,
)


# ---------------------------------------------------------------------------
# plain()


def test_plain_passes_through_json_scalars():
    for v in (None, True, 3, "x", 2.5):
        assert plain(v) == v


def test_plain_numpy_scalars_and_arrays():
    assert plain(np.float64(1.5)) == 1.5
    assert isinstance(plain(np.float64(1.5)), float)
    assert plain(np.int32(7)) == 7
    assert plain(np.bool_(True)) is True
    assert plain(np.array([1.0, 2.0])) == [1.0, 2.0]
    assert plain(np.arange(4).reshape(2, 2)) == [[0, 1], [2, 3]]


def test_plain_complex_becomes_re_im_pair():
    assert plain(complex(1.0, -2.0)) == [1.0, -2.0]
    assert plain(np.complex128(0.5j)) == [0.0, 0.5]
    assert plain(np.array([1.0 + 1.0j])) == [[1.0, 1.0]]


def test_plain_nonfinite_floats_become_null():
    assert plain(float("nan")) is None
    assert plain(float("inf")) is None
    assert plain(np.float64("-inf")) is None


def test_plain_prefers_describe_hook():
    st = mc.MaximalStatistics(
        estimate_sup_sq=2.0, stderr_sup_sq=0.1,
        estimate_sup_abs=1.0, stderr_sup_abs=0.05,
        endpoint_sq=1.5, endpoint_sq_stderr=0.1,
        replicates=100, n_columns=4, field="real",
    )
    d = plain(st)
    assert d["sup_sq_mean"] == 2.0
    assert d["replicates"] == 100


def test_plain_flattens_plain_dataclasses():
    @dataclasses.dataclass
    class Row:
        a: int
        b: float

    assert plain(Row(1, 2.5)) == {"a": 1, "b": 2.5}
    assert plain({"k": Row(1, 2.5)}) == {"k": {"a": 1, "b": 2.5}}
    assert plain([Row(1, 2.5), (3, 4)]) == [{"a": 1, "b": 2.5}, [3, 4]]


def test_plain_stringifies_dict_keys():
    assert plain({1: "a"}) == {"1": "a"}


def test_plain_rejects_opaque_objects():
    with pytest.raises(ValidationError):
        plain(object())
    with pytest.raises(ValidationError):
        plain({"f": lambda: None})


# ---------------------------------------------------------------------------
# Report round trips


def _sample_report():
    return Report(
        command="simulate",
        config={"n": 8, "seed": 3},
        criterion_values={"mr": 1.25},
        bound_reports=[mc.BoundReport(
            bound_name="lemma", theoretical=4.0, empirical=1.0,
            stderr=0.1, margin_sigmas=30.0, verdict="pass",
        )],
        diagnostics=[{"kind": "note", "status": "ok"}],
        estimates={"sup_sq": 1.0},
        seed=3,
        wall_time=0.25,
    )


def test_report_json_round_trip():
    rep = _sample_report()
    text = rep.to_json()
    assert text.endswith("\n")
    back = from_json(text)
    assert back.command == "simulate"
    assert back.seed == 3
    assert back.criterion_values == {"mr": 1.25}
    assert back.bound_reports[0]["verdict"] == "pass"
    assert back.schema_version == rep.schema_version
    assert back.tool_version == rep.tool_version
    # already-plain data survives a second round unchanged
    assert json.loads(back.to_json()) == json.loads(text)


def test_report_defaults_fill_tool_version():
    rep = Report(command="x")
    assert rep.tool_version != ""
    assert rep.schema_version == "1.0"


def test_report_json_is_sorted_and_nan_safe():
    rep = _sample_report()
    rep.estimates["bad"] = float("nan")
    data = json.loads(rep.to_json())
    assert data["estimates"]["bad"] is None
    keys = list(data.keys())
    assert keys == sorted(keys)


def test_from_json_version_gate():
    rep = _sample_report()
    data = json.loads(rep.to_json())
    data["schema_version"] = "1.5"
    assert from_json(json.dumps(data)).schema_version == "1.5"
    data["schema_version"] = "2.0"
    with pytest.raises(ValidationError):
        from_json(json.dumps(data))
    data.pop("schema_version")
    with pytest.raises(ValidationError):
        from_json(json.dumps(data))


def test_from_json_rejects_malformed_input():
    with pytest.raises(ValidationError):
        from_json("{not json")
    with pytest.raises(ValidationError):
        from_json("[1, 2]")


def test_from_json_ignores_unknown_fields():
    data = json.loads(_sample_report().to_json())
    data["future_field"] = {"x": 1}
    rep = from_json(json.dumps(data))
    assert not hasattr(rep, "future_field")
    assert rep.command == "simulate"


# ---------------------------------------------------------------------------
# CSV summary


def test_csv_summary_rows():
    rep = _sample_report()
    rep.bound_reports.append(mc.BoundReport(
        bound_name="sudakov", theoretical=2.0, empirical=0.0,
        stderr=0.0, margin_sigmas=None, verdict="pass",
    ))
    lines = rep.csv_summary().splitlines()
    assert lines[0] == "bound_name,theoretical,empirical,stderr,margin_sigmas,verdict"
    assert lines[1] == "lemma,4.0,1.0,0.1,30.0,pass"
    assert lines[2] == "sudakov,2.0,0.0,0.0,,pass"  # undefined margin stays empty
    assert len(lines) == 3


def test_csv_summary_cells_round_trip_floats():
    x = 1.0 / 3.0
    rep = Report(command="simulate", bound_reports=[mc.BoundReport(
        bound_name="lemma", theoretical=x, empirical=x, stderr=x,
        margin_sigmas=x, verdict="pass",
    )])
    row = rep.csv_summary().splitlines()[1].split(",")
    assert float(row[1]) == x  # repr() cells parse back exactly


def test_csv_summary_empty_report():
    assert Report(command="criteria").csv_summary().splitlines() == [
        "bound_name,theoretical,empirical,stderr,margin_sigmas,verdict"
    ]


# ---------------------------------------------------------------------------
# Reproducibility comparison


def test_equal_modulo_wall_time():
    a = _sample_report()
    b = _sample_report()
    b.wall_time = a.wall_time + 5.0
    assert equal_modulo_wall_time(a.to_json(), b.to_json())
    b.seed = 99
    assert not equal_modulo_wall_time(a.to_json(), b.to_json())


def test_equal_modulo_wall_time_is_strict_elsewhere():
    a = _sample_report().to_json()
    data = json.loads(a)
    data["estimates"]["sup_sq"] = math.nextafter(1.0, 2.0)
    assert not equal_modulo_wall_time(a, json.dumps(data))

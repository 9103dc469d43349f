import json
import math

import numpy as np
import pandas as pd
import pytest

from quantum_cycles.utils.formatters import fitted_order, records_to_csv, to_clean_csv, to_report_json
from quantum_cycles.utils.validators import validate_ascending, validate_resolutions, validate_sweep_parameter


def test_fitted_order_recovers_power_laws():
    n = np.array([16, 32, 64, 128])
    assert fitted_order(n, 3.0 * n**-2.0) == pytest.approx(-2.0)
    assert math.isnan(fitted_order(n, [0.0, 0.0, 0.0, 1e-3]))
    assert math.isnan(fitted_order([8], [1e-3]))


def test_csv_drops_empty_columns():
    df = pd.DataFrame({"k": [2, 3], "residual": [0.5, 0.4], "note": [np.nan, np.nan]})
    assert to_clean_csv(df).splitlines() == ["k,residual", "2,0.5", "3,0.4"]
    assert records_to_csv([{"k": 4, "residual": 1 / 3}]).splitlines()[1] == "4,0.333333333333"


def test_report_json_writes_nan_as_null():
    text = to_report_json({"b": [1.0, float("nan")], "a": {"inf": float("inf")}})
    assert json.loads(text) == {"a": {"inf": None}, "b": [1.0, None]}
    assert text.index('"a"') < text.index('"b"')


def test_validators():
    assert validate_resolutions([4, 8], 2) == [4, 8]
    for bad in ([], [1, 4], [4, 4]):
        with pytest.raises(ValueError):
            validate_resolutions(bad, 2)
    with pytest.raises(ValueError):
        validate_ascending([8, 4])
    assert validate_sweep_parameter("N") == "N"
    with pytest.raises(ValueError):
        validate_sweep_parameter("n")

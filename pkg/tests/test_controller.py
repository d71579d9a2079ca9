"""Area controller: measurement intake, windows, declarations, rollover."""
from datetime import datetime, timedelta, timezone

import pytest

from firewatch.controller import Measurement, RiskController, compute_average
from firewatch.errors import (
    ConfigError,
    InvalidMeasurementError,
    StaleTimestampError,
)
from firewatch.fuzzy import RiskLevel
from helpers import AREA, BASE_TS, CALM, DEVICE, make_measurement


@pytest.fixture
def controller(rulebase):
    return RiskController(rulebase)


@pytest.fixture
def area(controller):
    return controller.new_area(AREA)


# ----------------------------------------------------------------------
# Measurement validation


class TestMeasurement:
    def test_roundtrip_via_dict(self):
        m = make_measurement(seconds=90)
        again = Measurement.from_dict(m.to_dict())
        assert again == m
        assert isinstance(m.to_dict()["timestamp"], int)

    def test_from_dict_accepts_iso_timestamps(self):
        d = make_measurement().to_dict()
        d["timestamp"] = "2026-08-01T06:00:00+00:00"
        assert Measurement.from_dict(d).timestamp == BASE_TS

    def test_subsecond_precision_dropped(self):
        m = make_measurement()
        shifted = Measurement.from_dict({**m.to_dict()})
        assert shifted.timestamp.microsecond == 0

    @pytest.mark.parametrize("bad_id", ["12345", "35693803564380a",
                                        "3569380356438091", ""])
    def test_device_id_must_be_fifteen_digits(self, bad_id):
        with pytest.raises(InvalidMeasurementError):
            make_measurement(device_id=bad_id)

    def test_naive_timestamp_rejected(self):
        with pytest.raises(InvalidMeasurementError):
            Measurement(device_id=DEVICE, area_id=AREA,
                        timestamp=datetime(2026, 8, 1, 6, 0, 0),
                        lat=39.0, lon=-120.0, battery_pct=90.0, **CALM)

    @pytest.mark.parametrize("field,value", [
        ("lat", 91.0), ("lon", -181.0), ("battery_pct", 120.0),
    ])
    def test_position_and_battery_ranges(self, field, value):
        kwargs = dict(device_id=DEVICE, area_id=AREA, timestamp=BASE_TS,
                      lat=39.0, lon=-120.0, battery_pct=90.0, **CALM)
        kwargs[field] = value
        with pytest.raises(InvalidMeasurementError):
            Measurement(**kwargs)

    def test_non_finite_reading_rejected(self):
        with pytest.raises(InvalidMeasurementError):
            make_measurement(temperature_c=float("nan"))


# ----------------------------------------------------------------------
# averaging windows


def test_compute_average_trailing_window():
    values = [float(i) for i in range(1, 21)]
    assert compute_average(values, None) == pytest.approx(10.5)
    assert compute_average(values, 5) == pytest.approx(18.0)
    with pytest.raises(ValueError):
        compute_average([], 5)


#: (prior level, declaration active) -> expected trailing window
WINDOW_CASES = [
    (RiskLevel.NFR, False, None),
    (RiskLevel.NFR, True, 5),
    (RiskLevel.LFR, False, 15),
    (RiskLevel.LFR, True, 5),
    (RiskLevel.HFR, False, 10),
    (RiskLevel.HFR, True, 5),
    (RiskLevel.EFR, False, 5),
    (RiskLevel.EFR, True, 5),
]


@pytest.mark.parametrize("prior,declared,expected", WINDOW_CASES)
def test_window_policy_table(controller, prior, declared, expected):
    assert controller.window_size(prior, declared) == expected


@pytest.mark.parametrize("prior,declared,expected", WINDOW_CASES)
def test_assess_averages_over_the_policy_window(controller, prior, declared,
                                                expected):
    """Feed 20 known samples, force the prior level, check the mean."""
    state = controller.new_area(AREA)
    temps = [20.0 + 0.1 * i for i in range(20)]
    for i, temp in enumerate(temps):
        state.history.append(make_measurement(seconds=60 * i,
                                              temperature_c=temp))
    state.current_level = prior
    when = BASE_TS + timedelta(seconds=60 * 20)
    if declared:
        controller.apply_declaration(state, RiskLevel.HFR,
                                     timedelta(hours=2), when)
    m = make_measurement(seconds=60 * 20, temperature_c=25.0)
    assessment = controller.assess(state, m)

    window = expected if expected is not None else len(temps)
    assert assessment.window_used == (expected if expected is not None else "all")
    assert assessment.declaration_active is declared
    assert assessment.averages["temperature_c"] == \
        pytest.approx(sum(temps[-window:]) / window)


# ----------------------------------------------------------------------
# cold start, stale input, determinism


def test_cold_start_calm_baseline_assesses_nfr(controller, area):
    assessment = controller.assess(area, make_measurement())
    assert assessment.level == RiskLevel.NFR
    assert assessment.window_used == "all"
    # with no history the reading is its own average
    assert assessment.averages == assessment.values
    assert area.history and area.current_level == RiskLevel.NFR


def test_plateau_diagonal_tracks_term_severity(controller, area):
    """When reading and average share the medium plateau the diagonal
    cell (LFR) decides."""
    controller.assess(area, make_measurement(temperature_c=35.0))
    a2 = controller.assess(area, make_measurement(seconds=60,
                                                 temperature_c=35.0))
    assert a2.level == RiskLevel.LFR


def test_stale_timestamp_rejected_even_across_devices(controller, area):
    controller.assess(area, make_measurement(seconds=120))
    with pytest.raises(StaleTimestampError):
        controller.assess(area, make_measurement(seconds=120))
    other_device = make_measurement(seconds=60, device_id="111111111111111")
    with pytest.raises(StaleTimestampError):
        controller.assess(area, other_device)
    assert len(area.history) == 1


def test_wrong_area_rejected(controller, area):
    with pytest.raises(InvalidMeasurementError):
        controller.assess(area, make_measurement(area_id="elsewhere"))


def test_assessments_are_deterministic(controller):
    runs = []
    for _ in range(2):
        state = controller.new_area(AREA)
        out = []
        for i in range(10):
            out.append(controller.assess(
                state, make_measurement(seconds=60 * i,
                                        temperature_c=25.0 + i)).to_dict())
        runs.append(out)
    assert runs[0] == runs[1]


# ----------------------------------------------------------------------
# declarations


def test_declaration_rejects_nfr_and_bad_ttl(controller, area):
    with pytest.raises(ConfigError):
        controller.apply_declaration(area, RiskLevel.NFR,
                                     timedelta(hours=1), BASE_TS)
    with pytest.raises(ConfigError):
        controller.apply_declaration(area, RiskLevel.HFR,
                                     timedelta(0), BASE_TS)


def test_declaration_expiry_follows_measurement_time(controller, area):
    controller.apply_declaration(area, RiskLevel.HFR,
                                 timedelta(seconds=300), BASE_TS)
    inside = controller.assess(area, make_measurement(seconds=299))
    assert inside.declaration_active
    outside = controller.assess(area, make_measurement(seconds=360))
    assert not outside.declaration_active


def test_new_declaration_replaces_previous(controller, area):
    controller.apply_declaration(area, RiskLevel.LFR, timedelta(hours=1), BASE_TS)
    controller.apply_declaration(area, RiskLevel.EFR, timedelta(hours=2), BASE_TS)
    assert area.declaration.level == RiskLevel.EFR


# ----------------------------------------------------------------------
# day rollover


def test_rollover_clears_history_and_resets_level(controller, area):
    for i in range(5):
        controller.assess(area, make_measurement(seconds=60 * i,
                                                 temperature_c=35.0))
    assert area.current_level != RiskLevel.NFR
    next_day = controller.assess(area, make_measurement(seconds=24 * 3600))
    assert len(area.history) == 1
    assert next_day.window_used == "all"
    assert next_day.averages == next_day.values


def test_rollover_keeps_declarations(controller, area):
    controller.apply_declaration(area, RiskLevel.HFR,
                                 timedelta(days=2), BASE_TS)
    controller.assess(area, make_measurement(seconds=0))
    controller.assess(area, make_measurement(seconds=24 * 3600))
    assert area.declaration is not None
    assert area.declaration.level == RiskLevel.HFR


def test_rollover_uses_the_area_timezone(controller):
    """Sydney is UTC+10 in August: base 06:00Z is 16:00 local, so local
    midnight arrives eight hours in."""
    state = controller.new_area(AREA, tz="Australia/Sydney")
    before = make_measurement(seconds=(7 * 3600) + (59 * 60))  # 23:59 local
    after = make_measurement(seconds=8 * 3600 + 60)            # 00:01 local
    controller.assess(state, before)
    controller.assess(state, after)
    assert len(state.history) == 1


# ----------------------------------------------------------------------
# cadence recommendation


def test_recommended_cycle_periods(controller):
    assert controller.recommended_cycle_period(RiskLevel.NFR) == 300
    assert controller.recommended_cycle_period(RiskLevel.LFR) == 180
    assert controller.recommended_cycle_period(RiskLevel.HFR) == 120
    assert controller.recommended_cycle_period(RiskLevel.EFR) == 60

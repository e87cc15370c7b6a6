import pytest

from seqcf.objective import SettingSpec
from seqcf.records import ExplanationRecord, read_records, write_records


def make_record(user=1, cf=(1, 2, 9), lev=1):
    return ExplanationRecord(
        user=user,
        method="gece",
        setting=SettingSpec.from_name("targ_un", target_item=9),
        source=(1, 2, 3),
        counterfactual=cf,
        valid_at_k={1: True, 5: True},
        hamming=1 if cf else None,
        levenshtein=lev,
        generation_found=4 if cf else None,
        seed=7,
    )


def test_present_counterfactual_requires_positive_distance():
    with pytest.raises(ValueError, match="edit distance"):
        make_record(lev=0)


def test_jsonl_round_trip(tmp_path):
    path = tmp_path / "out.jsonl"
    records = [make_record(user=u) for u in (1, 2)] + [
        ExplanationRecord(
            user=3,
            method="random",
            setting=SettingSpec.from_name("targ_un", target_item=9),
            source=(4, 5),
            counterfactual=None,
            valid_at_k={1: False, 5: False},
            hamming=None,
            levenshtein=None,
            generation_found=None,
            seed=7,
        )
    ]
    write_records(path, records, config={"setting": "targ_un", "seed": 7})
    header, loaded = read_records(path)
    assert header["config"]["seed"] == 7
    assert header["normalization"] == "softmax"
    assert loaded == records


def test_header_is_mandatory(tmp_path):
    path = tmp_path / "bad.jsonl"
    path.write_text('{"record_type": "explanation"}\n')
    with pytest.raises(ValueError, match="header"):
        read_records(path)


def test_write_is_byte_stable(tmp_path):
    a, b = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
    records = [make_record(user=u) for u in (1, 2, 3)]
    write_records(a, records, config={"x": 1})
    write_records(b, records, config={"x": 1})
    assert a.read_bytes() == b.read_bytes()

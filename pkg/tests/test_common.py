#
# NOTES:
#
import json

import pytest

import dispersym.common as common



rows = [
    {'k': 5, 'stage': 1, 'pass': True},
    {'k': 5, 'stage': 2, 'pass': False, 'extra': 'dropped'}
]
fields = ['k', 'stage', 'pass']

worker_params = [
    pytest.param('3', 3),
    pytest.param('0', 1),
    pytest.param('-4', 1),
]
parse_error_params = [
    pytest.param('bad token', 4, ['x', 'i'], 'bad token at position 4 (expected one of: i, x)'),
    pytest.param('empty expression', 0, [], 'empty expression at position 0'),
]



def test_fmt_json():
    out = json.loads(common.format('json', rows, fields))

    assert out == [{'k': 5, 'stage': 1, 'pass': True}, {'k': 5, 'stage': 2, 'pass': False}]


def test_fmt_json_options():
    out = common.fmt_json(rows, ['k'], {'indent': None, 'type': 'json'})

    assert out == '[{"k": 5}, {"k": 5}]'


def test_fmt_tabulate():
    out = common.format('TEXT', rows, fields).splitlines()

    assert out[0].split() == fields
    assert len(out) == 4


def test_unknown_format():
    with pytest.raises(NameError):
        common.format('xml', rows, fields)


@pytest.mark.parametrize('value, expected', worker_params)
def test_worker_count(monkeypatch, value, expected):
    monkeypatch.setenv(common.THREADS_ENV, value)

    assert common.worker_count() == expected


def test_worker_count_default(monkeypatch):
    monkeypatch.delenv(common.THREADS_ENV, raising=False)

    assert common.worker_count() >= 1


@pytest.mark.parametrize('message, position, expected, text', parse_error_params)
def test_parse_error(message, position, expected, text):
    e = common.ParseError(message, position, expected)

    assert str(e) == text
    assert isinstance(e, ValueError)


def test_structural_violation():
    e = common.StructuralViolation((1, 2, 0), 'iii', 'b_1')

    assert e.cell == (1, 2, 0)
    assert 'property (iii)' in str(e)

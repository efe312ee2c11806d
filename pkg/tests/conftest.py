import random
from pathlib import Path

import pytest

from factweaver.table import load_csv

REPO_ROOT = Path(__file__).resolve().parent.parent
CAR_SALES_CSV = REPO_ROOT / "demos" / "data" / "car_sales.csv"


def make_csv(header: str, rows: list[str]) -> bytes:
    return ("\n".join([header] + rows) + "\n").encode()


@pytest.fixture(scope="session")
def car_sales_table():
    """275-row, 4-column car sales fixture (Year/Brand/Category/Sales)."""
    return load_csv(CAR_SALES_CSV.read_bytes())


@pytest.fixture(scope="session")
def car_sales_bytes():
    return CAR_SALES_CSV.read_bytes()


@pytest.fixture()
def small_table():
    """10 rows, schema Brand(C), Year(T), Sales(N): m=2 subspace fields, N=1.

    Brand=Ford matches exactly 5 of 10 rows, so the Ford subspace probability
    is (1/4) * 0.5 = 0.125 and its self-information is 3 bits.
    """
    rows = [
        "Ford,2007,100",
        "Ford,2007,120",
        "Ford,2008,90",
        "Ford,2008,80",
        "Ford,2009,60",
        "Toyota,2007,105",
        "Toyota,2008,95",
        "Toyota,2009,85",
        "BMW,2008,50",
        "BMW,2009,40",
    ]
    return load_csv(make_csv("Brand,Year,Sales", rows))


@pytest.fixture()
def tiny_table():
    """6-row, 3-column table for brute-force probability oracles."""
    rows = [
        "a,2001,1",
        "a,2001,2",
        "a,2002,3",
        "b,2002,4",
        "b,2003,5",
        "c,2003,9",
    ]
    return load_csv(make_csv("Group,Year,Metric", rows))


def covid_csv_bytes() -> bytes:
    """Daily deaths by province with a clear decreasing trend, a spike of 42
    on 2020/3/2, Hubei dominating the totals, and a contrarian region whose
    deaths rise over time."""
    provinces = {
        "Hubei": 36.0,
        "Guangdong": 2.2,
        "Henan": 1.4,
        "Zhejiang": 0.9,
    }
    rng = random.Random(20200301)
    lines = []
    for day in range(1, 22):
        date = f"2020/3/{day}"
        decay = max(0.12, 1.0 - 0.045 * (day - 1))
        for province, base in provinces.items():
            deaths = base * decay + (rng.random() - 0.5) * 0.4
            deaths = max(0.0, deaths)
            lines.append((date, province, round(deaths)))
        # Island region: small but increasing over the month.
        lines.append((date, "Island", min(6, day // 4)))
    # Pin the spike: totals on 2020/3/2 must reach exactly 42.
    day2 = [i for i, (d, _, _) in enumerate(lines) if d == "2020/3/2"]
    current = sum(lines[i][2] for i in day2)
    date, province, value = lines[day2[0]]
    lines[day2[0]] = (date, province, value + (42 - current))
    rows = [f"{d},{p},{v}" for d, p, v in lines]
    return make_csv("Date,Province,Deaths", rows)


@pytest.fixture(scope="session")
def covid_table():
    return load_csv(covid_csv_bytes())


def trace_csv_bytes() -> bytes:
    """Fixture shaped so the best 3-fact story is the documented chain:
    full-table trend, then the spike-date extreme via elaboration, then the
    by-province distribution via similarity.

    Shape requirements baked in: date totals follow an affine power law with
    a small spike (outstanding to the extreme's tail test without wrecking
    the trend fit); per-province series are jagged (rotating multipliers) so
    no filtered trend outranks the full one; province totals are bimodal
    (non-normal for the distribution test, no outstanding top for rank)."""
    high = [f"H{i}" for i in range(1, 5)]
    low = [f"L{i}" for i in range(1, 8)]
    provs = high + low
    base = {p: (2.2 if p in high else 0.5) for p in provs}
    multipliers = [2.6, 0.3, 1.5, 0.5, 2.0, 0.4, 1.2, 0.8, 1.8, 0.6, 1.0]
    hubei_wobble = [1.15, 0.85, 1.1, 0.9, 1.2, 0.8, 1.05, 0.95, 1.25, 0.75, 1.0]
    rng = random.Random(7)
    lines = []

    def day_label(d):
        return f"2020/3/{d}" if d <= 31 else f"2020/4/{d - 31}"

    amplitude, floor = 15.0, 38.0
    for d in range(1, 46):
        if d == 2:
            total = floor + amplitude + 1.2
        elif d == 1:
            total = floor + amplitude * 2**-0.7
        else:
            total = floor + amplitude * d**-0.7
        total *= 1.0 + (rng.random() - 0.5) * 0.004
        hubei = 11.0 * hubei_wobble[(d * 3) % len(hubei_wobble)]
        remainder = max(1.0, total - hubei)
        ms = multipliers[:]
        rng.shuffle(ms)
        weights = [base[p] * m for p, m in zip(provs, ms)]
        wsum = sum(weights)
        lines.append(f"{day_label(d)},Hubei,{hubei:.2f}")
        for p, w in zip(provs, weights):
            lines.append(f"{day_label(d)},{p},{remainder * w / wsum:.2f}")
    return make_csv("Date,Province,Deaths", lines)


@pytest.fixture(scope="session")
def trace_table():
    return load_csv(trace_csv_bytes())

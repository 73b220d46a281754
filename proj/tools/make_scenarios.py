#!/usr/bin/env python3
"""Regenerates the scripted scenario pack under data/scenarios and data/scripts."""
import bisect
import json
import pathlib

ROOT = pathlib.Path(__file__).resolve().parent.parent
DATA = ROOT / "data"
QTAO = "Question:"
EXTRACT = "Extract the input parameters"
REC = "Conversation:"


def step(thought, action, action_input):
    return f"Thought: {thought}\nAction: {action}\nAction Input: {action_input}"


def final(thought, answer):
    return f"Thought: {thought}\nFinal Answer: {answer}"


def queue(matcher, completions):
    return [{"substring": matcher, "completion": c, "consume_once": True} for c in completions]


CLOCK = "2025-01-01T09:00"
FIG1_Q = "I want to go from Chongqing to Chengdu tomorrow afternoon. Which trains can I take?"

FIGURE1_SCRIPT = {
    "entries": [
        {"substring": "Question: " + FIG1_Q, "consume_once": True, "completion": step(
            "The passenger needs train tickets from Chongqing to Chengdu tomorrow afternoon, so I should query the ticketing tool.",
            "Ticketing", "from=Chongqing Station, to=Chengdu Station, date=tomorrow, time=afternoon")},
        {"substring": "no direct train service exists", "consume_once": True, "completion": step(
            "There is no direct service between those stations, but Chongqing North to Chengdu East has services. I will query that route.",
            "Ticketing", "from=Chongqing North, to=Chengdu East, date=tomorrow, time=afternoon")},
        {"substring": "Found 4 train(s) from Chongqing North to Chengdu East", "consume_once": True, "completion": final(
            "I now have three afternoon trains for the passenger.",
            "There is no direct train from Chongqing Station to Chengdu Station, but these trains run from "
            "Chongqing North to Chengdu East tomorrow afternoon: G8505 12:15-13:50, G8507 13:40-15:18, "
            "G8509 15:05-16:41.")},
    ]
}

WEATHER_Q = "What will the weather be like in Beijing tomorrow?"
WEATHER_SCRIPT = {
    "entries": [
        {"substring": "Question: " + WEATHER_Q, "consume_once": True, "completion": step(
            "The passenger asks for tomorrow's weather in Beijing.", "Weather", "place=Beijing, time=tomorrow")},
        {"substring": "Weather for Beijing on 2025-01-02", "consume_once": True, "completion": final(
            "I have the forecast.", "Tomorrow Beijing will be sunny, between -7 and 3 degrees C with a light north wind.")},
    ]
}

AFTERNOON = ["G8505", "G8507", "G8509"]


def ticketing(sid, question, completions, trains, error_info=True, slots=None, extract=None):
    s = {
        "scenario_id": sid, "task": "ticketing", "turns": [question], "clock": CLOCK,
        "error_info": error_info, "expected": {"trains": trains},
        "script": queue(QTAO, completions) + queue(EXTRACT, extract or []),
    }
    if slots:
        s["expected"]["slots"] = slots
    return s


def weather(sid, question, completions, city, date, extract=None):
    return {
        "scenario_id": sid, "task": "weather", "turns": [question], "clock": CLOCK,
        "expected": {"city": city, "date": date},
        "script": queue(QTAO, completions) + queue(EXTRACT, extract or []),
    }


def ticketing_pack():
    sorry = final("The tool could not find trains.", "Sorry, I could not find any trains for that request.")
    out = [
        {"scenario_id": "tkt-w-01-figure1", "task": "ticketing", "turns": [FIG1_Q], "clock": CLOCK,
         "error_info": True, "expected": {"trains": AFTERNOON,
                                          "slots": {"from": "Chongqing", "to": "Chengdu", "date": "tomorrow", "time": "afternoon"}},
         "script": "../scripts/figure1.json"},
        ticketing("tkt-w-02-direct", "Trains from Chongqing North to Chengdu East tomorrow morning?", [
            step("Query the exact stations.", "Ticketing", "from=Chongqing North, to=Chengdu East, date=tomorrow, time=morning"),
            final("Found them.", "G8501 07:10 and G8503 09:30 run tomorrow morning."),
        ], ["G8501", "G8503"]),
        ticketing("tkt-w-03-weekday", "Any trains from Chongqing North to Chengdu East on Friday?", [
            step("Friday is a weekday name the tool understands.", "Ticketing", "from=Chongqing North, to=Chengdu East, date=Friday"),
            final("Found them.", "On Friday G8521 08:10 and G8523 13:00 run from Chongqing North to Chengdu East."),
        ], ["G8521", "G8523"]),
        ticketing("tkt-w-04-bad-date", "I need a train from Chongqing North to Chengdu East on the thirty-second.", [
            step("Pass the date through.", "Ticketing", "from=Chongqing North, to=Chengdu East, date=the thirty-second"),
            sorry,
        ], ["G8501"], slots={"date": "2025-01-02"}),
        ticketing("tkt-w-05-bad-station", "Trains from Chongqing to Lhasa tomorrow?", [
            step("Query the route.", "Ticketing", "from=Chongqing, to=Lhasa, date=tomorrow"),
            sorry,
        ], ["X1"]),
        ticketing("tkt-w-06-empty-window", "Trains from Chengdu East to Chongqing North tomorrow between 20:00 and 23:00?", [
            step("Query with the window.", "Ticketing", "from=Chengdu East, to=Chongqing North, date=tomorrow, time=20:00-23:00"),
            sorry,
        ], ["G8603"]),
        ticketing("tkt-w-07-parse-failure", "Book me something to Chengdu East tomorrow.", [
            "I am not sure what to do.", "Still not sure.",
        ], ["G8501"]),
        ticketing("tkt-w-08-wrong-date", "Trains from Chongqing North to Chengdu East tomorrow afternoon?", [
            step("Query the route.", "Ticketing", "from=Chongqing North, to=Chengdu East, date=day after tomorrow, time=afternoon"),
            final("Found one.", "G8523 departs at 13:00."),
        ], AFTERNOON, slots={"from": "Chongqing North", "to": "Chengdu East", "date": "tomorrow", "time": "afternoon"}),
        ticketing("tkt-w-09-extracted", "I'm going from Chongqing North to Chengdu East tomorrow afternoon, show me trains.", [
            step("I need train data.", "Ticketing", "time=afternoon"),
            final("Found them.", "G8505, G8507 and G8509 depart tomorrow afternoon."),
        ], AFTERNOON, extract=["from=Chongqing North, to=Chengdu East, date=tomorrow"]),
        ticketing("tkt-w-10-budget", "Trains from Chongqing North to Chengdu East tomorrow?", [
            step("Query.", "Ticketing", "from=Chongqing North, to=Chengdu East, date=2024-12-30"),
        ] * 5, ["G8501"]),
        # without error info: the model only sees a bare "no matching trains found"
        {"scenario_id": "tkt-wo-01-figure1", "task": "ticketing", "turns": [FIG1_Q], "clock": CLOCK,
         "error_info": False, "expected": {"trains": AFTERNOON},
         "script": queue(QTAO, [
             step("Query the ticketing tool.", "Ticketing", "from=Chongqing Station, to=Chengdu Station, date=tomorrow, time=afternoon"),
             step("Nothing found; Chongqing North and Chengdu East are the main high-speed stations.", "Ticketing",
                  "from=Chongqing North, to=Chengdu East, date=tomorrow, time=afternoon"),
             final("Found them.", "G8505, G8507 and G8509 run tomorrow afternoon from Chongqing North to Chengdu East."),
         ])},
        ticketing("tkt-wo-02-direct", "Trains from Beijing South to Shanghai Hongqiao tomorrow?", [
            step("Query.", "Ticketing", "from=Beijing South, to=Shanghai Hongqiao, date=tomorrow"),
            final("Found them.", "G1 09:00 and G3 14:00."),
        ], ["G1", "G3"], error_info=False),
        ticketing("tkt-wo-03-bad-station", "Trains from Chongqing to Lhasa tomorrow?", [
            step("Query the route.", "Ticketing", "from=Chongqing, to=Lhasa, date=tomorrow"),
            sorry,
        ], ["X1"], error_info=False),
        ticketing("tkt-wo-04-empty-window", "Trains from Chengdu to Chongqing tomorrow night?", [
            step("Query with the window.", "Ticketing", "from=Chengdu East, to=Chongqing North, date=tomorrow, time=20:00-23:00"),
            sorry,
        ], ["G8603"], error_info=False),
        ticketing("tkt-wo-05-past-date", "Trains from Chongqing North to Chengdu East on December 30?", [
            step("Query.", "Ticketing", "from=Chongqing North, to=Chengdu East, date=2024-12-30"),
            sorry,
        ], ["G8501"], error_info=False),
        ticketing("tkt-wo-06-wrong-station", "Trains from Chongqing West to Chengdu South tomorrow afternoon?", [
            step("Query.", "Ticketing", "from=Chongqing North, to=Chengdu East, date=tomorrow, time=afternoon"),
            final("Found them.", "G8505, G8507 and G8509."),
        ], ["D6173"], error_info=False,
            slots={"from": "Chongqing West", "to": "Chengdu South", "date": "tomorrow", "time": "afternoon"}),
    ]
    return out


def weather_pack():
    sorry = final("No forecast.", "Sorry, I could not get that forecast.")
    return [
        {"scenario_id": "wx-01-beijing", "task": "weather", "turns": [WEATHER_Q], "clock": CLOCK,
         "expected": {"city": "Beijing", "date": "2025-01-02"}, "script": "../scripts/weather_beijing.json"},
        weather("wx-02-shanghai-today", "Is it raining in Shanghai today?", [
            step("Check today's weather.", "Weather", "place=Shanghai, time=today"),
            final("Done.", "Shanghai is sunny today."),
        ], "Shanghai", "2025-01-01"),
        weather("wx-03-chengdu-friday", "Weather in Chengdu on Friday?", [
            step("Check Friday.", "Weather", "place=Chengdu, time=Friday"),
            final("Done.", "Cloudy in Chengdu on Friday."),
        ], "Chengdu", "2025-01-03"),
        weather("wx-04-retry", "How is the weather in Chongqing tomorrow?", [
            step("Check.", "Weather", "place=Chongqing City, time=tomorrow"),
            step("The city name was not recognised; use the plain name.", "Weather", "place=Chongqing, time=tomorrow"),
            final("Done.", "Light rain in Chongqing tomorrow."),
        ], "Chongqing", "2025-01-02"),
        weather("wx-05-unknown-city", "What's the weather in Atlantis tomorrow?", [
            step("Check.", "Weather", "place=Atlantis, time=tomorrow"), sorry,
        ], "Atlantis", "2025-01-02"),
        weather("wx-06-beyond-horizon", "Weather in Beijing next Tuesday?", [
            step("Check.", "Weather", "place=Beijing, time=Tuesday"), sorry,
        ], "Beijing", "2025-01-07"),
        weather("wx-07-missing-place", "Will it be cold tomorrow?", [
            step("Check the weather.", "Weather", "time=tomorrow"), sorry,
        ], "Beijing", "2025-01-02", extract=["time=tomorrow", "none"]),
        weather("wx-08-wrong-city", "Weather in Shanghai tomorrow?", [
            step("Check.", "Weather", "place=Beijing, time=tomorrow"),
            final("Done.", "Sunny."),
        ], "Shanghai", "2025-01-02"),
        weather("wx-09-direct-answer", "Is Beijing cold in winter?", [
            final("General knowledge is enough.", "Yes, Beijing winters are cold and dry."),
        ], "Beijing", "2025-01-02"),
    ]


def load_corpus():
    lines = (DATA / "corpus" / "sample_corpus.jsonl").read_text().splitlines()
    legend = json.loads(lines[0])["legend"]
    return legend, [json.loads(l) for l in lines[1:]]


SPICE = ["not_spicy", "mild", "medium", "very_spicy", "extra_spicy"]
MEALS = ["breakfast", "lunch", "dinner", "snack"]


def claim(item, legend):
    meals = "/".join(m for m, f in zip(MEALS, item["meal_suitability"]) if f)
    spice = "/".join(s for s, f in zip(SPICE, item["spiciness"]) if f)
    return (f"type={legend['type_of_food'][str(item['type_of_food'])]}, "
            f"cuisine={legend['cuisine'][str(item['cuisine'])]}, meal={meals}, "
            f"child_friendly={'yes' if item['child_friendly'] else 'no'}, spiciness={spice}, price={item['price']}")


def price_bin(price, prices, bins):
    ordered = sorted(prices)
    cuts = [ordered[i * len(ordered) // bins] for i in range(1, bins)]
    return bisect.bisect_right(cuts, price)


def feature_key(item, prices, bins):
    return (item["type_of_food"], item["cuisine"], tuple(item["meal_suitability"]), item["child_friendly"],
            tuple(item["spiciness"]), price_bin(item["price"], prices, bins))


# One row per session: ground truth and, per turn, where it shows up in the
# ten-item list: ("exact", rank) by catalog name, ("features", rank) as an
# invented name carrying the item's exact features, or ("absent", None).
REC_DESIGN = [
    ("D001", [("exact", 1)]),
    ("D002", [("features", 1)]),
    ("D003", [("absent", None), ("exact", 2)]),
    ("D005", [("exact", 3)]),
    ("D006", [("features", 4)]),
    ("D007", [("absent", None), ("absent", None), ("exact", 5)]),
    ("D008", [("exact", 6)]),
    ("D009", [("features", 7)]),
    ("D010", [("absent", None), ("features", 8)]),
    ("D011", [("exact", 9)]),
    ("D012", [("exact", 10)]),
    ("D014", [("absent", None), ("absent", None), ("absent", None)]),
    ("D015", [("exact", 1)]),
    ("D017", [("features", 2)]),
    ("D019", [("exact", 3)]),
    ("D021", [("absent", None), ("exact", 1)]),
    ("D023", [("features", 5)]),
    ("D024", [("exact", 7)]),
    ("D025", [("absent", None), ("absent", None), ("absent", None)]),
    ("D027", [("exact", 2)]),
    ("D028", [("features", 3)]),
    ("D031", [("exact", 8)]),
    ("D033", [("absent", None), ("features", 1)]),
    ("D035", [("exact", 4)]),
    ("D039", [("features", 6)]),
]


def recommendation_pack():
    legend, items = load_corpus()
    by_id = {i["item_id"]: i for i in items}
    prices = [i["price"] for i in items]
    key = lambda i: feature_key(i, prices, legend["price_bins"])
    keys = {}
    for i in items:
        keys.setdefault(key(i), []).append(i["item_id"])
    out = []
    for n, (gt, turns) in enumerate(REC_DESIGN, start=1):
        target = by_id[gt]
        for variant, _ in turns:
            if variant == "features" and len(keys[key(target)]) != 1:
                raise SystemExit(f"{gt}: features are not unique in the corpus")
        fillers = [i for i in items if i["item_id"] != gt and len(keys[key(i)]) == 1]
        completions = []
        for t, (variant, rank) in enumerate(turns):
            pool = fillers[(n * 3 + t * 7) % len(fillers):] + fillers[:(n * 3 + t * 7) % len(fillers)]
            names = [f["name"] for f in pool[:10]]
            if variant == "exact":
                names[rank - 1] = target["name"]
                names = names[:10]
            lines = []
            for r, name in enumerate(names, start=1):
                if variant == "features" and r == rank:
                    lines.append(f"{r}. House Special {n} ({claim(target, legend)})")
                else:
                    lines.append(f"{r}. {name}")
            completions.append("\n".join(lines))
        out.append({
            "scenario_id": f"rec-{n:02d}",
            "task": "recommendation",
            "seed": n,
            "turn_budget": 3,
            "profile": {"passenger_id": f"P{n:02d}", "age": 20 + n, "gender": "female" if n % 2 else "male",
                        "place_of_birth": target["city"]},
            "expected": {"item_id": gt},
            "script": queue(REC, completions),
        })
    return out


def dump(path, obj):
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(obj, indent=2, ensure_ascii=False) + "\n")


if __name__ == "__main__":
    dump(DATA / "scripts" / "figure1.json", FIGURE1_SCRIPT)
    dump(DATA / "scripts" / "weather_beijing.json", WEATHER_SCRIPT)
    dump(DATA / "scenarios" / "ticketing.json", ticketing_pack())
    dump(DATA / "scenarios" / "weather.json", weather_pack())
    dump(DATA / "scenarios" / "recommendation.json", recommendation_pack())

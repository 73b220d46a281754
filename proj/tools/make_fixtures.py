#!/usr/bin/env python3
"""Regenerates the sample corpus, timetable and forecast fixtures under data/."""
import json
import pathlib

DATA = pathlib.Path(__file__).resolve().parent.parent / "data"

LEGEND = {
    "type_of_food": {"1": "Chinese", "2": "Western"},
    "cuisine": {"1": "Sichuan", "2": "Cantonese", "3": "Shandong", "4": "Huaiyang", "5": "Fast Food"},
    "price_bins": 5,
}

B, L, D, S = "breakfast", "lunch", "dinner", "snack"
SPICE = ["not_spicy", "mild", "medium", "very_spicy", "extra_spicy"]

# name, city, restaurant, price, type, cuisine, meals, child, spice levels
DISHES = [
    ("Chongqing Noodle", "Chongqing", "Xiaomian House", 18, 1, 1, [B, L, S], 0, SPICE[1:]),
    ("Spicy Chicken Burger", "Chongqing", "McDonald's", 22, 2, 5, [L, D, S], 0, ["medium"]),
    ("Big Mac", "Chongqing", "McDonald's", 25, 2, 5, [L, D], 1, ["not_spicy"]),
    ("French Fries", "Chongqing", "McDonald's", 12, 2, 5, [L, D, S], 1, ["not_spicy"]),
    ("Chicken McNuggets", "Chongqing", "McDonald's", 15, 2, 5, [L, D, S], 1, ["not_spicy"]),
    ("Mapo Tofu Rice", "Chongqing", "Sichuan Kitchen", 28, 1, 1, [L, D], 0, ["medium", "very_spicy"]),
    ("Kung Pao Chicken Rice", "Chongqing", "Sichuan Kitchen", 32, 1, 1, [L, D], 0, ["mild", "medium"]),
    ("Chongqing Hot Pot Set", "Chongqing", "Hotpot Express", 68, 1, 1, [D], 0, ["very_spicy", "extra_spicy"]),
    ("Suanla Fen", "Chongqing", "Xiaomian House", 15, 1, 1, [B, L, S], 0, ["medium", "very_spicy"]),
    ("Twice Cooked Pork Rice", "Chongqing", "Sichuan Kitchen", 35, 1, 1, [L, D], 0, ["medium"]),
    ("Dan Dan Noodles", "Chongqing", "Xiaomian House", 16, 1, 1, [B, L], 0, ["mild", "medium"]),
    ("Chilled Rabbit Bites", "Chongqing", "Hotpot Express", 38, 1, 1, [S], 0, ["very_spicy"]),
    ("Steamed Pork Buns", "Chongqing", "Morning Bao", 10, 1, 3, [B, S], 1, ["not_spicy"]),
    ("Soy Milk and Fried Dough", "Chongqing", "Morning Bao", 8, 1, 3, [B], 1, ["not_spicy"]),
    ("Mango Pomelo Sago", "Chongqing", "Sweet Harbour", 20, 1, 2, [S], 1, ["not_spicy"]),
    ("Cantonese Roast Duck Rice", "Chongqing", "Sweet Harbour", 42, 1, 2, [L, D], 1, ["not_spicy"]),
    ("Iced Lemon Tea", "Chongqing", "Sweet Harbour", 12, 1, 2, [S], 1, ["not_spicy"]),
    ("Vanilla Sundae", "Chongqing", "McDonald's", 9, 2, 5, [S], 1, ["not_spicy"]),
    ("Sausage Egg Muffin", "Chongqing", "McDonald's", 14, 2, 5, [B], 1, ["not_spicy"]),
    ("Fish Flavoured Pork Rice", "Chongqing", "Sichuan Kitchen", 30, 1, 1, [L, D], 0, ["mild"]),
    ("Shanghai Soup Dumplings", "Shanghai", "Nanxiang Dumpling", 32, 1, 4, [B, L], 1, ["not_spicy"]),
    ("Pan Fried Buns", "Shanghai", "Nanxiang Dumpling", 18, 1, 4, [B, S], 1, ["not_spicy"]),
    ("Scallion Oil Noodles", "Shanghai", "Nanxiang Dumpling", 20, 1, 4, [B, L], 1, ["not_spicy"]),
    ("Braised Pork Belly Rice", "Shanghai", "Old Shanghai Canteen", 45, 1, 4, [L, D], 1, ["not_spicy"]),
    ("Drunken Chicken", "Shanghai", "Old Shanghai Canteen", 48, 1, 4, [D], 0, ["not_spicy"]),
    ("Crab Shell Pastry", "Shanghai", "Old Shanghai Canteen", 12, 1, 4, [B, S], 1, ["not_spicy"]),
    ("Double Cheeseburger", "Shanghai", "McDonald's", 24, 2, 5, [L, D], 1, ["not_spicy"]),
    ("McSpicy Chicken Wrap", "Shanghai", "McDonald's", 21, 2, 5, [L, S], 0, ["mild", "medium"]),
    ("Apple Pie", "Shanghai", "McDonald's", 9, 2, 5, [S], 1, ["not_spicy"]),
    ("Hash Brown", "Shanghai", "McDonald's", 8, 2, 5, [B, S], 1, ["not_spicy"]),
    ("Caesar Salad", "Shanghai", "Harbour Cafe", 38, 2, 5, [L, D], 1, ["not_spicy"]),
    ("Beef Lasagne", "Shanghai", "Harbour Cafe", 52, 2, 5, [L, D], 1, ["not_spicy"]),
    ("Cappuccino", "Shanghai", "Harbour Cafe", 28, 2, 5, [B, S], 0, ["not_spicy"]),
    ("Shrimp Har Gow", "Shanghai", "Canton Tea House", 30, 1, 2, [B, L], 1, ["not_spicy"]),
    ("Char Siu Rice", "Shanghai", "Canton Tea House", 40, 1, 2, [L, D], 1, ["not_spicy"]),
    ("Egg Tart", "Shanghai", "Canton Tea House", 10, 1, 2, [B, S], 1, ["not_spicy"]),
    ("Sweet and Sour Pork Rice", "Shanghai", "Shandong Home", 36, 1, 3, [L, D], 1, ["not_spicy"]),
    ("Jianbing", "Shanghai", "Shandong Home", 12, 1, 3, [B, S], 1, ["mild"]),
    ("Braised Intestines Noodles", "Shanghai", "Shandong Home", 34, 1, 3, [L, D], 0, ["mild", "medium"]),
    ("Boiled Fish in Chili Oil", "Shanghai", "Sichuan Kitchen", 58, 1, 1, [D], 0, ["very_spicy", "extra_spicy"]),
]


def write_corpus():
    lines = [json.dumps({"format": "dish-catalog-jsonl", "version": 1, "legend": LEGEND})]
    for i, (name, city, rest, price, typ, cui, meals, child, spice) in enumerate(DISHES, start=1):
        lines.append(json.dumps({
            "item_id": f"D{i:03d}",
            "name": name,
            "city": city,
            "restaurant": rest,
            "price": price,
            "type_of_food": typ,
            "cuisine": cui,
            "meal_suitability": [int(m in meals) for m in (B, L, D, S)],
            "child_friendly": child,
            "spiciness": [int(s in spice) for s in SPICE],
        }))
    out = DATA / "corpus" / "sample_corpus.jsonl"
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text("\n".join(lines) + "\n")


STATIONS = [
    ("CQN", "Chongqing North", "Chongqing"),
    ("CQW", "Chongqing West", "Chongqing"),
    ("CDE", "Chengdu East", "Chengdu"),
    ("CDS", "Chengdu South", "Chengdu"),
    ("BJS", "Beijing South", "Beijing"),
    ("SHH", "Shanghai Hongqiao", "Shanghai"),
]


def seats(second, first, business):
    return [
        {"class": "second", "remaining": second, "price": 154.0},
        {"class": "first", "remaining": first, "price": 247.0},
        {"class": "business", "remaining": business, "price": 463.0},
    ]


# (train, dep, arr, dep_time, arr_time)
SERVICES = [
    # 2025-01-02: Chongqing North -> Chengdu East has the most services.
    ("G8501", "CQN", "CDE", "2025-01-02T07:10", "2025-01-02T08:52"),
    ("G8503", "CQN", "CDE", "2025-01-02T09:30", "2025-01-02T11:05"),
    ("G8505", "CQN", "CDE", "2025-01-02T12:15", "2025-01-02T13:50"),
    ("G8507", "CQN", "CDE", "2025-01-02T13:40", "2025-01-02T15:18"),
    ("G8509", "CQN", "CDE", "2025-01-02T15:05", "2025-01-02T16:41"),
    ("G8511", "CQN", "CDE", "2025-01-02T17:20", "2025-01-02T18:58"),
    ("G8513", "CQN", "CDE", "2025-01-02T19:45", "2025-01-02T21:20"),
    ("D6171", "CQW", "CDS", "2025-01-02T08:00", "2025-01-02T10:10"),
    ("D6173", "CQW", "CDS", "2025-01-02T14:30", "2025-01-02T16:45"),
    ("C6021", "CQW", "CDE", "2025-01-02T10:20", "2025-01-02T12:05"),
    ("G8601", "CDE", "CQN", "2025-01-02T08:30", "2025-01-02T10:05"),
    ("G8603", "CDE", "CQN", "2025-01-02T16:00", "2025-01-02T17:38"),
    ("G1", "BJS", "SHH", "2025-01-02T09:00", "2025-01-02T13:28"),
    ("G3", "BJS", "SHH", "2025-01-02T14:00", "2025-01-02T18:30"),
    # 2025-01-03
    ("G8521", "CQN", "CDE", "2025-01-03T08:10", "2025-01-03T09:45"),
    ("G8523", "CQN", "CDE", "2025-01-03T13:00", "2025-01-03T14:36"),
    ("D6175", "CQW", "CDS", "2025-01-03T15:30", "2025-01-03T17:40"),
]


def write_timetable():
    lines = [json.dumps({"kind": "station", "station_id": s, "name": n, "city": c}) for s, n, c in STATIONS]
    for k, (train, dep, arr, dt, at) in enumerate(SERVICES):
        lines.append(json.dumps({
            "kind": "service", "train_no": train, "dep": dep, "arr": arr,
            "dep_time": dt, "arr_time": at,
            "seats": seats(20 + k, 5 + k % 4, k % 3),
        }))
    out = DATA / "timetable" / "sample_timetable.jsonl"
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text("\n".join(lines) + "\n")


FORECASTS = [
    ("Beijing", "2025-01-01", "Sunny", -8, 2, "Northwest wind level 3"),
    ("Beijing", "2025-01-02", "Sunny", -7, 3, "North wind level 2"),
    ("Beijing", "2025-01-03", "Cloudy", -6, 1, "North wind level 3"),
    ("Beijing", "2025-01-04", "Overcast", -5, 2, "Calm"),
    ("Chongqing", "2025-01-01", "Overcast", 6, 10, "Calm"),
    ("Chongqing", "2025-01-02", "Light rain", 7, 9, "East wind level 1"),
    ("Chongqing", "2025-01-03", "Cloudy", 6, 11, "Calm"),
    ("Chengdu", "2025-01-01", "Foggy", 3, 9, "Calm"),
    ("Chengdu", "2025-01-02", "Cloudy", 4, 10, "North wind level 1"),
    ("Chengdu", "2025-01-03", "Cloudy", 4, 11, "Calm"),
    ("Shanghai", "2025-01-01", "Sunny", 2, 9, "Northwest wind level 3"),
    ("Shanghai", "2025-01-02", "Cloudy", 3, 10, "North wind level 2"),
    ("Shanghai", "2025-01-03", "Light rain", 4, 8, "Northeast wind level 3"),
]


def write_forecasts():
    lines = [json.dumps({"city": c, "date": d, "condition": cond, "temp_low": lo, "temp_high": hi, "wind": w})
             for c, d, cond, lo, hi, w in FORECASTS]
    out = DATA / "weather" / "forecasts.jsonl"
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text("\n".join(lines) + "\n")


if __name__ == "__main__":
    write_corpus()
    write_timetable()
    write_forecasts()

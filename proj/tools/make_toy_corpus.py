#!/usr/bin/env python3
"""Regenerates the bundled toy corpus under data/toy.

Every sentence follows one fixed template, so the slot values alone decide
the whole sentence. Value words stay rare and template words frequent,
which is what the frequency-thresholded corruption relies on.
"""
import csv
import random
import sys
from pathlib import Path

NAMES = ["Aromi", "Zizzi", "Cotto", "Alimentum", "Giraffe", "Wildwood", "Strada", "Fitzbillies", "Browns",
         "Clowns", "Bibimbap", "Midsummer House", "Loch Fyne", "The Eagle", "Blue Spice", "Green Man",
         "The Punter", "The Mill", "Cocum", "Travellers Rest", "Wrestlers", "Zizzi Express", "The Olive Grove",
         "Bakers", "The Phoenix"]
FOODS = ["Italian", "Indian", "French", "Chinese", "English", "Japanese", "Thai", "Spanish"]
EAT_TYPES = ["restaurant", "pub", "coffee shop", "bistro", "wine bar", "tea room", "diner"]
AREAS = ["riverside", "city centre", "market square", "old town", "harbour", "university quarter"]
NEAR = ["Café Rouge", "Burger King", "Crowne Plaza Hotel", "The Sorrento", "Yippee Noodle Bar", "All Bar One",
        "Avalon", "Ranch", "Clare Hall", "The Bakers"]
PRICES = ["cheap", "pricey", "moderately priced"]


def sentence(mr):
    words = [mr["name"], "is", "a"]
    if "priceRange" in mr:
        words.append(mr["priceRange"])
    if mr.get("familyFriendly") == "yes":
        words.append("family friendly")
    if "food" in mr:
        words.append(mr["food"])
    words.append(mr["eatType"])
    if "area" in mr:
        words += ["in the", mr["area"], "area"]
    if "near" in mr:
        words += ["near", mr["near"]]
    return " ".join(words) + "."


def format_mr(mr):
    order = ["name", "eatType", "priceRange", "food", "area", "familyFriendly", "near"]
    return ", ".join(f"{k}[{mr[k]}]" for k in order if k in mr)


def sample(rng):
    mr = {"name": rng.choice(NAMES), "eatType": rng.choice(EAT_TYPES)}
    for key, values, prob in [("priceRange", PRICES, 0.3), ("food", FOODS, 0.6), ("area", AREAS, 0.5),
                              ("near", NEAR, 0.4)]:
        if rng.random() < prob:
            mr[key] = rng.choice(values)
    if rng.random() < 0.2:
        mr["familyFriendly"] = "yes"
    return mr


def content_key(mr):
    return tuple(sorted(mr.items()))


def main(out_dir):
    rng = random.Random(20190601)
    seen = set()
    train = []
    while len(train) < 100:
        mr = sample(rng)
        if content_key(mr) not in seen:
            seen.add(content_key(mr))
            train.append(mr)
    dev = []
    while len(dev) < 20:
        mr = sample(rng)
        if content_key(mr) not in seen:
            seen.add(content_key(mr))
            dev.append(mr)

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "train.txt").write_text("".join(sentence(mr) + "\n" for mr in train), encoding="utf-8")
    for name, rows in [("train.csv", train), ("dev.csv", dev)]:
        with open(out / name, "w", newline="", encoding="utf-8") as f:
            w = csv.writer(f, lineterminator="\n")
            w.writerow(["mr", "ref"])
            for mr in rows:
                w.writerow([format_mr(mr), sentence(mr)])


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "data/toy")

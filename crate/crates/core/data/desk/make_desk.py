"""Regenerate the synthetic desk caption corpus.

Each image is a scene (subject, activity, object, place). References are
five independent paraphrases of the scene; the system caption is a single
realization of a perturbed copy of the scene, so it is fluent but sometimes
names the wrong object or place. Training captions come from a disjoint set
of scenes.

    python3 make_desk.py   # writes system_results.json, references.json, train_captions.tsv
"""

import json
import random

SEED = 20161017
N_EVAL_IMAGES = 100
N_TRAIN_IMAGES = 100
REFS_PER_IMAGE = 5

SUBJECTS = [
    ("man", "men"), ("woman", "women"), ("boy", "boys"), ("girl", "girls"),
    ("dog", "dogs"), ("person", "people"), ("child", "children"), ("player", "players"),
]
HUMAN_ONLY = {"riding", "holding", "eating", "throwing", "looking", "flying", "carrying", "cutting"}

# activity -> (third person form, joining preposition or None, objects)
ACTIVITIES = {
    "riding": ("rides", None, ["wave", "horse", "skateboard", "bike", "motorcycle"]),
    "holding": ("holds", None, ["umbrella", "kite", "frisbee", "phone", "racket", "bat"]),
    "eating": ("eats", None, ["pizza", "sandwich", "cake", "donut", "banana"]),
    "playing": ("plays", "with", ["frisbee", "ball", "kite"]),
    "throwing": ("throws", None, ["frisbee", "ball"]),
    "looking": ("looks", "at", ["laptop", "phone", "window", "sign"]),
    "flying": ("flies", None, ["kite"]),
    "carrying": ("carries", None, ["umbrella", "bag", "surfboard"]),
    "cutting": ("cuts", None, ["pizza", "cake", "sandwich"]),
    "sitting": ("sits", "on", ["bench", "couch", "bed", "chair"]),
    "standing": ("stands", "near", ["bus", "train", "fence", "tree"]),
}

PLACES = {
    "beach": ["on", "at"], "park": ["in"], "field": ["in"], "street": ["on", "down"],
    "kitchen": ["in"], "snow": ["in"], "grass": ["in", "on"], "city": ["in"],
    "water": ["in", "near"], "road": ["on", "near"],
}

SUBJECT_ADJECTIVES = ["young", "little", "old", "small"]
OBJECT_ADJECTIVES = ["large", "white", "red", "big", "small"]


def article(word):
    return "an" if word[0] in "aeiou" else "a"


def np(rng, noun, adjectives, det=None, adj_p=0.3):
    words = []
    if rng.random() < adj_p:
        words.append(rng.choice(adjectives))
    words.append(noun)
    det = det or article(words[0])
    return [det] + words


def sample_scene(rng):
    subject = rng.choice(SUBJECTS)
    while True:
        activity = rng.choice(list(ACTIVITIES))
        if subject[0] != "dog" or activity not in HUMAN_ONLY:
            break
    obj = rng.choice(ACTIVITIES[activity][2])
    place = rng.choice(list(PLACES))
    return {"subject": subject, "activity": activity, "object": obj, "place": place}


def realize(rng, scene, style=None):
    singular, plural = scene["subject"]
    ving = scene["activity"]
    vs, join, _ = ACTIVITIES[ving]
    obj = np(rng, scene["object"], OBJECT_ADJECTIVES, adj_p=0.25)
    if join:
        obj = [join] + obj
    place = scene["place"]
    prep = rng.choice(PLACES[place])
    where = [prep, rng.choice(["the", "a"]) if place not in ("snow", "grass", "water") else "the", place]

    style = style if style is not None else rng.randrange(6)
    if style == 0:
        words = np(rng, singular, SUBJECT_ADJECTIVES) + [ving] + obj + where
    elif style == 1:
        words = np(rng, singular, SUBJECT_ADJECTIVES) + ["is", ving] + obj + where
    elif style == 2:
        words = ["the", singular, vs] + obj + where
    elif style == 3:
        words = np(rng, singular, SUBJECT_ADJECTIVES, adj_p=0.5) + [ving] + obj
    elif style == 4:
        words = [rng.choice(["two", "three", "some"]), plural, ving] + obj + where
    else:
        words = ["there", "is", article(singular), singular, ving] + obj + where
    return " ".join(words)


def perturb(rng, scene):
    scene = dict(scene)
    if rng.random() < 0.3:
        scene["place"] = rng.choice(list(PLACES))
    if rng.random() < 0.25:
        scene["object"] = rng.choice(ACTIVITIES[scene["activity"]][2])
    if rng.random() < 0.15:
        options = [s for s in SUBJECTS if s[0] != "dog" or scene["activity"] not in HUMAN_ONLY]
        scene["subject"] = rng.choice(options)
    return scene


def main():
    rng = random.Random(SEED)
    results, annotations = [], []
    ann_id = 1
    for image_id in range(1, N_EVAL_IMAGES + 1):
        scene = sample_scene(rng)
        for _ in range(REFS_PER_IMAGE):
            annotations.append({"id": ann_id, "image_id": image_id, "caption": realize(rng, scene)})
            ann_id += 1
        results.append({"image_id": image_id, "caption": realize(rng, perturb(rng, scene), style=rng.choice([0, 1]))})

    train = []
    for image_id in range(1001, 1001 + N_TRAIN_IMAGES):
        scene = sample_scene(rng)
        for _ in range(REFS_PER_IMAGE):
            train.append(f"{image_id}\t{realize(rng, scene)}")

    with open("system_results.json", "w") as f:
        json.dump(results, f, indent=1)
        f.write("\n")
    with open("references.json", "w") as f:
        json.dump({"annotations": annotations}, f, indent=1)
        f.write("\n")
    with open("train_captions.tsv", "w") as f:
        f.write("\n".join(train) + "\n")


if __name__ == "__main__":
    main()

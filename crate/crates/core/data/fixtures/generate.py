"""Regenerates posts.csv, the synthetic 200-post demo corpus.

Layout: 20 posts fall outside 2017, and of the 180 posts dated in 2017,
exactly 72 mention a keyword from the bundled themes.
"""
import csv
import random

rng = random.Random(2017)

AUTHORS = [
    ("accenturespain", 15000), ("kpmges", 22000), ("bipitalia", 3100),
    ("deloitte_it", 9800), ("everis", 12500), ("pwc_spain", 30500),
    ("reply_it", 4200), ("indra_co", 18000), ("minsait", 7600),
    ("ey_italia", 5400), ("nttdata_es", 11000), ("tinylab", 0),
]

INNOVATION = [
    "Our #innovation lab in Madrid opens new opportunities for clients :)",
    "Great projects from the startup community at @{a} this week",
    "Innovación y talento: the best entrepreneurship award goes to our team",
    "How to innovate in banking, a great success story https://t.co/{u}",
    "Entrepreneur stories: amazing growth for a young startup in Milano",
    "Innovative ideas win again! Proud of the projects team #innovation",
    "Startup weekend was a fantastic success, thanks to all mentors",
    "Failure is part of innovation, but bad planning kills opportunities",
]
DATA = [
    "Big data and cognitive systems improve the customer experience",
    "The internet of things brings smart and reliable factories https://www.example.com/{u}",
    "#IoT sensors and big data: a powerful combination for energy firms",
    "Digital transformation is hard, many projects fail without a clear strategy",
    "New report on technology trends 2017: cloud, IoT and big data",
    "Digitization of public services: slow progress and costly delays",
    "Cognitive systems help doctors, an excellent result for health care",
    "Technology alone is not enough, weak leadership is a serious problem",
]
OTHER = [
    "Buongiorno Milano! Oggi evento con i nostri clienti alle {n}",
    "Feliz viernes a todos, nos vemos en la oficina de Barcelona",
    "Join our team at the annual meeting in Rome on {n} May",
    "Thanks for the warm welcome at the conference :)",
    "Nuevo informe sobre el mercado laboral en España https://t.co/{u}",
    "Read the interview with our managing partner @{a}",
    "Our offices will be closed for the holiday, happy holidays!",
    "La strategia fiscale per le imprese italiane, webinar gratuito",
    "Terrible traffic this morning, meeting moved to {n} pm",
    "Congratulations to the winners of the football tournament",
    "Nos encanta colaborar con universidades y centros de estudio",
    "Il nostro report annuale sulla sostenibilita e online",
]


def fill(t):
    return t.format(
        a=rng.choice(AUTHORS)[0],
        u="".join(rng.choice("abcdefghjk0123456789") for _ in range(8)),
        n=rng.randint(1, 12),
    )


def stamp(in_range):
    if in_range:
        month, day = rng.randint(1, 12), rng.randint(1, 28)
        year = 2017
    else:
        year, month, day = rng.choice([(2016, 12, rng.randint(1, 31)), (2018, 1, rng.randint(1, 31))])
    return f"{year:04d}-{month:02d}-{day:02d}T{rng.randint(0, 23):02d}:{rng.randint(0, 59):02d}:00Z"


kinds = ["kw"] * 72 + ["other"] * 108
rng.shuffle(kinds)
plan = [(k, True) for k in kinds] + [(rng.choice(["kw", "other"]), False) for _ in range(20)]
rng.shuffle(plan)

rows = []
for i, (kind, in_range) in enumerate(plan):
    author, followers = rng.choice(AUTHORS)
    if kind == "kw":
        text = fill(rng.choice(INNOVATION if rng.random() < 0.5 else DATA))
    else:
        text = fill(rng.choice(OTHER))
    rows.append({
        "id": f"p{i:03d}",
        "author": author,
        "followers": followers,
        "retweets": rng.randint(0, 40),
        "favorites": rng.randint(0, 120),
        "timestamp": stamp(in_range),
        "text": text,
        "language_hint": "",
    })

with open("posts.csv", "w", newline="", encoding="utf-8") as f:
    w = csv.DictWriter(f, fieldnames=list(rows[0]), lineterminator="\n")
    w.writeheader()
    w.writerows(rows)

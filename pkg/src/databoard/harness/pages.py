"""Deterministic synthetic listing pages with known ground truth.

Every page is a product/record listing whose main body holds a known number
of uniformly structured cards, with optional realistic quality issues
(inconsistent currency formats, missing fields, extraneous marketing text)
injected on chosen rows. The generator returns the ground truth alongside
the html so extraction tests can assert exact recovery.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

DOMAINS = {
    "cameras": {
        "brands": ["Canon", "Nikon", "Sony", "Fujifilm", "Panasonic", "Olympus"],
        "models": ["PowerShot", "Alpha", "Lumix", "X-T", "Z fc", "EOS", "Pen-F"],
        "extra": ("resolution", ["12 MP", "20 MP", "24 MP", "33 MP", "45 MP"]),
    },
    "monitors": {
        "brands": ["Dell", "LG", "Samsung", "BenQ", "AOC", "Acer"],
        "models": ["UltraSharp", "UltraGear", "Odyssey", "Mobiuz", "Nitro"],
        "extra": ("resolution", ["1080p", "1440p", "4K", "5K"]),
    },
    "movies": {
        "brands": ["The", "A", "Last", "First", "Silent", "Hidden"],
        "models": ["Voyage", "Garden", "Signal", "Harbor", "Meridian", "Echo"],
        "extra": ("year", ["2018", "2019", "2020", "2021", "2022", "2023"]),
    },
    "teams": {
        "brands": ["North", "South", "East", "West", "Royal", "United"],
        "models": ["Falcons", "Rovers", "Wolves", "Mariners", "Comets"],
        "extra": ("wins", ["8", "11", "14", "17", "21"]),
    },
    "stocks": {
        "brands": ["Apex", "Blue", "Cedar", "Delta", "Ember", "Flux"],
        "models": ["Corp", "Industries", "Holdings", "Systems", "Labs"],
        "extra": ("change", ["+1.2%", "-0.8%", "+3.4%", "-2.1%", "+0.3%"]),
    },
}


@dataclass
class ListingItem:
    title: str
    image: str
    price: str
    rating: str | None
    extra: str | None


@dataclass
class ListingPage:
    url: str
    html: str
    items: list[ListingItem]
    extra_field: str

    @property
    def count(self) -> int:
        return len(self.items)


def _price_text(value: float, style: str) -> str:
    if style == "usd-symbol":
        return f"${value:,.2f}"
    if style == "usd-spaced":
        return f"US ${value:,.0f}"
    if style == "hkd":
        return f"HK$ {value:,.0f}"
    if style == "code-suffix":
        return f"{value:,.0f} USD"
    return f"{value:,.0f}"


def generate_listing(seed: int, n_items: int, domain: str = "cameras",
                     url: str | None = None, price_style: str = "usd-symbol",
                     missing_rating_rows: tuple[int, ...] = (),
                     sponsored_rows: tuple[int, ...] = (),
                     na_price_rows: tuple[int, ...] = (),
                     shared_titles: list[str] | None = None) -> ListingPage:
    """One deterministic listing page.

    `shared_titles` pins the first titles, letting two pages share records
    for join scenarios; the injection tuples plant quality issues on exact
    rows.
    """
    if domain not in DOMAINS:
        raise ValueError(f"unknown domain {domain!r}")
    vocabulary = DOMAINS[domain]
    rng = random.Random(seed)
    extra_name, extra_values = vocabulary["extra"]
    page_url = url or f"https://{domain}.shop.test/listing/{seed}"
    items = []
    used_titles = set()
    for i in range(n_items):
        if shared_titles and i < len(shared_titles):
            title = shared_titles[i]
        else:
            while True:
                title = (f"{rng.choice(vocabulary['brands'])} "
                         f"{rng.choice(vocabulary['models'])} {rng.randint(100, 999)}")
                if title not in used_titles:
                    break
        used_titles.add(title)
        display_title = title
        if i in sponsored_rows:
            display_title = "Sponsored " + title
        price_value = float(rng.randint(80, 4000))
        price = "N/A" if i in na_price_rows else _price_text(price_value, price_style)
        rating = None if i in missing_rating_rows else f"{rng.randint(20, 50) / 10:.1f}"
        extra = rng.choice(extra_values)
        items.append(ListingItem(
            title=display_title,
            image=f"https://img.test/{domain}/{seed}-{i}.jpg",
            price=price,
            rating=rating,
            extra=extra,
        ))

    cards = []
    for item in items:
        rating_html = (f'<span class="rating">{item.rating}</span>'
                       if item.rating is not None else "")
        cards.append(
            f'<li class="item">'
            f'<img class="thumb" src="{item.image}">'
            f'<span class="title">{item.title}</span>'
            f'<span class="price">{item.price}</span>'
            f'{rating_html}'
            f'<span class="{extra_name}">{item.extra}</span>'
            f'</li>')
    html = (
        "<html><head>"
        f"<title>{domain.title()} listing</title>"
        "</head><body>"
        f'<header><h1>{domain.title()} results</h1>'
        '<p class="tagline">Compare and choose</p></header>'
        '<main><ul class="listing">'
        + "".join(cards) +
        "</ul></main>"
        '<footer><p>generated fixture</p></footer>'
        "</body></html>")
    return ListingPage(page_url, html, items, extra_name)


FIELD_CLASSES = ("thumb", "title", "price", "rating")


def item_nodes(snapshot):
    """The li.item card nodes of a generated page, in document order."""
    return snapshot.dom.root.find_all("li", "item")


def field_node(card, class_name: str):
    if class_name == "thumb":
        found = [n for n in card.element_children() if n.tag == "img"]
    else:
        found = [n for n in card.element_children()
                 if n.tag == "span" and class_name in n.classes]
    return found[0] if found else None

#!/usr/bin/env python3
"""Writes the bundled simulated apps into corpus/.

Output is deterministic; rerun after editing and commit the JSON.

    python3 tools/gen_corpus.py [out_dir]
"""

import json
import os
import sys

WIDGETS = ["TextView", "ImageView", "CheckBox", "Switch", "RatingBar",
           "ProgressBar", "SeekBar", "Spinner", "RadioButton", "Chip"]


def leaf(tag):
    return {"tag": tag, "kind": "plain", "children": []}


def node(tag, children, kind="plain"):
    return {"tag": tag, "kind": kind, "children": children}


def web(markup):
    return {"tag": "WebView", "kind": "web_container", "children": [], "markup": markup}


def pane(tag, variant, size=6):
    # A content block whose shape depends on variant, so screens differ in
    # more than their pane tag.
    kids = []
    i = 0
    while len(kids) < size - 1:
        w = WIDGETS[(variant + i) % len(WIDGETS)]
        if i % 3 == 2:
            kids.append(node("Card", [leaf(w), leaf("TextView")]))
        else:
            kids.append(leaf(w))
        i += 1
    return node(tag, kids)


class App:
    def __init__(self, name, seed=7):
        self.name = name
        self.seed = seed
        self.activities = []
        self.noise = []
        self._screens = {}

    def activity(self, name, token=None):
        act = {"name": name, "intent_token": token or name, "screens": []}
        self.activities.append(act)
        return act

    def screen(self, act, sid, body=None, buttons=0, extra=None, variant=None):
        """Root children: Toolbar, body, extras, then `buttons` Button leaves.

        Returns the screen; button k sits at path [offset + k] (see button()).
        """
        if variant is None:
            variant = len(self._screens)
        if body is None:
            body = pane(sid + "Pane", variant)
        kids = [node("Toolbar", [leaf("ImageButton"), leaf("TextView")]), body]
        kids += extra or []
        first = len(kids)
        kids += [leaf("Button") for _ in range(buttons)]
        s = {"id": sid, "tree": node(act["name"], kids), "bindings": [], "_first": first}
        act["screens"].append(s)
        self._screens[sid] = s
        return s

    def bind(self, sid, path, effect, action="tap", works_times=None):
        b = {"path": path, "action": action, "effect": effect}
        if works_times is not None:
            b["works_times"] = works_times
        self._screens[sid]["bindings"].append(b)

    def button(self, sid, k, effect, **kw):
        self.bind(sid, [self._screens[sid]["_first"] + k], effect, **kw)

    def go(self, sid, k, target, **kw):
        self.button(sid, k, "goto:" + target, **kw)

    def doc(self, entry):
        acts = []
        for a in self.activities:
            screens = [{k: v for k, v in s.items() if not k.startswith("_")}
                       for s in a["screens"]]
            acts.append({"name": a["name"], "intent_token": a["intent_token"],
                         "screens": screens})
        return {"name": self.name, "seed": self.seed, "entry_activity": entry,
                "activities": acts, "noise_rules": self.noise}


def newsreader():
    app = App("newsreader", seed=11)
    news = app.activity("NewsListActivity")
    rows = [node("NewsRow", [leaf("ImageView"), leaf("TextView"), leaf("TextView")])
            for _ in range(4)]
    feed = node("ListView", rows, kind="list_container")
    app.screen(news, "Feed", body=feed, buttons=4)
    app.screen(news, "Trending", buttons=2)
    app.screen(news, "Saved", buttons=1)
    app.screen(news, "Search", buttons=2, extra=[leaf("EditText")])
    app.screen(news, "SearchResults", buttons=1)
    detail = app.activity("DetailActivity")
    app.screen(detail, "Article", buttons=3)
    app.screen(detail, "Comments", buttons=1)
    app.screen(detail, "Share", buttons=1)
    app.screen(detail, "Gallery", buttons=1)
    settings = app.activity("SettingsActivity")
    app.screen(settings, "SettingsHome", buttons=2)
    app.screen(settings, "Notifications", buttons=1)
    app.screen(settings, "About", buttons=0)

    app.go("Feed", 0, "Article")
    app.go("Feed", 1, "Trending")
    app.go("Feed", 2, "Search")
    app.go("Feed", 3, "SettingsHome")
    app.bind("Feed", [1], "noop", action="scroll")
    app.go("Trending", 0, "Article")
    app.go("Trending", 1, "Saved")
    app.go("Saved", 0, "Feed")
    app.bind("Search", [2], "noop", action="type_text")
    app.go("Search", 0, "SearchResults")
    app.go("Search", 1, "Feed")
    app.go("SearchResults", 0, "Article")
    app.go("Article", 0, "Comments")
    app.go("Article", 1, "Share")
    app.go("Article", 2, "Gallery")
    app.go("Comments", 0, "Article")
    app.go("Share", 0, "Feed")
    app.go("Gallery", 0, "Article")
    app.go("SettingsHome", 0, "Notifications")
    app.go("SettingsHome", 1, "About")
    app.go("Notifications", 0, "SettingsHome")
    app.noise.append({"kind": "insert_decoration", "probability": 0.0, "target_path": [1]})
    return app.doc("NewsListActivity")


def linear():
    app = App("linear")
    act = app.activity("WizardActivity")
    ids = ["Welcome", "Terms", "Account", "Preferences", "Done"]
    for sid in ids:
        app.screen(act, sid, buttons=1)
    for a, b in zip(ids, ids[1:]):
        app.go(a, 0, b)
    return app.doc("WizardActivity")


def cycle():
    app = App("cycle")
    act = app.activity("CarouselActivity")
    ids = ["Slide1", "Slide2", "Slide3", "Slide4", "Slide5", "Slide6"]
    for sid in ids:
        app.screen(act, sid, buttons=2)
    for i, sid in enumerate(ids):
        app.go(sid, 0, ids[(i + 1) % len(ids)])
        app.go(sid, 1, ids[(i - 1) % len(ids)])
    return app.doc("CarouselActivity")


def twenty():
    app = App("twenty")
    main = app.activity("CatalogActivity")
    ids = ["Item%02d" % i for i in range(20)]
    for i, sid in enumerate(ids):
        app.screen(main, sid, buttons=2)
    # binary-ish tree with a few cross links
    for i, sid in enumerate(ids):
        for k, child in enumerate((2 * i + 1, 2 * i + 2)):
            if child < len(ids):
                app.go(sid, k, ids[child])
            else:
                app.go(sid, k, ids[(i * 7) % len(ids)])
    orphan = app.activity("HiddenActivity")
    app.screen(orphan, "Orphan1", buttons=1)
    app.screen(orphan, "Orphan2", buttons=1)
    app.go("Orphan1", 0, "Orphan2")
    app.go("Orphan2", 0, "Item00")
    return app.doc("CatalogActivity")


def profile():
    app = App("profile")
    home = app.activity("HomeActivity")
    app.screen(home, "Home", buttons=2)
    app.screen(home, "Menu", buttons=2)
    prof = app.activity("ProfileActivity")
    app.screen(prof, "ProfileView", buttons=2)
    app.screen(prof, "EditProfile", buttons=2, extra=[leaf("EditText"), leaf("EditText")])
    app.screen(prof, "Avatar", buttons=1)
    app.screen(prof, "Friends", buttons=1)
    app.screen(prof, "FriendDetail", buttons=1)
    app.screen(prof, "Badges", buttons=0)
    app.go("Home", 0, "Menu")
    app.go("Home", 1, "ProfileView")
    app.go("Menu", 0, "Home")
    app.go("Menu", 1, "Badges")
    app.go("ProfileView", 0, "EditProfile")
    app.go("ProfileView", 1, "Avatar")
    app.bind("EditProfile", [2], "noop", action="type_text")
    app.bind("EditProfile", [3], "noop", action="type_text")
    app.go("EditProfile", 0, "Friends")
    app.go("EditProfile", 1, "ProfileView")
    app.go("Avatar", 0, "FriendDetail")
    app.go("Friends", 0, "FriendDetail")
    app.go("FriendDetail", 0, "Friends")
    return app.doc("HomeActivity")


def webview():
    app = App("webview")
    act = app.activity("BrowserActivity")
    app.screen(act, "Start", buttons=3)
    shared = "ArticleBody"
    app.screen(act, "WebShort", body=node(shared, [web("<div><p/><p/></div>")]), buttons=1,
               variant=1)
    app.screen(act, "WebLong",
               body=node(shared, [web("<div><p/><p/><img src='a.png'/><ul><li/><li/></ul></div>")]),
               buttons=1, variant=1)
    app.screen(act, "Bookmarks", buttons=1)
    app.screen(act, "History", buttons=1)
    app.go("Start", 0, "WebShort")
    app.go("Start", 1, "WebLong")
    app.go("Start", 2, "Bookmarks")
    app.go("WebShort", 0, "Start")
    app.go("WebLong", 0, "History")
    app.go("Bookmarks", 0, "WebLong")
    app.go("History", 0, "Start")
    return app.doc("BrowserActivity")


def listdup():
    app = App("listdup", seed=5)
    act = app.activity("InboxActivity")
    rows = [node("MailRow", [leaf("CheckBox"), leaf("TextView"), leaf("TextView")])
            for _ in range(3)]
    app.screen(act, "Inbox", body=node("ListView", rows, kind="list_container"), buttons=2)
    app.screen(act, "Compose", buttons=1, extra=[leaf("EditText")])
    app.screen(act, "Thread", buttons=2)
    app.screen(act, "Archive", buttons=1)
    app.screen(act, "Labels", buttons=1)
    app.go("Inbox", 0, "Compose")
    app.go("Inbox", 1, "Thread")
    app.bind("Inbox", [1], "noop", action="scroll")
    app.go("Compose", 0, "Inbox")
    app.go("Thread", 0, "Archive")
    app.go("Thread", 1, "Labels")
    app.go("Archive", 0, "Inbox")
    app.go("Labels", 0, "Thread")
    app.noise.append({"kind": "duplicate_list_row", "probability": 0.5, "target_path": [1]})
    return app.doc("InboxActivity")


def deep():
    # A chain of activities, each with a hub and two leaves; depth 2 * 12.
    app = App("deep")
    n = 12
    names = ["Level%02dActivity" % i for i in range(n)]
    for i, name in enumerate(names):
        act = app.activity(name)
        app.screen(act, "Hub%02d" % i, buttons=3, variant=i)
        app.screen(act, "Mid%02d" % i, buttons=2, variant=i + 1)
        app.screen(act, "Leaf%02d" % i, buttons=1, variant=i + 2)
    for i in range(n):
        hub, mid, lf = "Hub%02d" % i, "Mid%02d" % i, "Leaf%02d" % i
        app.go(hub, 0, mid)
        app.button(hub, 1, "noop")
        app.go(hub, 2, lf)
        app.go(mid, 0, lf)
        if i + 1 < n:
            app.go(mid, 1, "Hub%02d" % (i + 1))
        else:
            app.go(mid, 1, hub)
        app.go(lf, 0, hub)
    return app.doc(names[0])


def hostile():
    app = App("hostile", seed=99)
    act = app.activity("NoisyActivity")
    ids = ["Lobby", "Market", "Forge", "Vault", "Arena", "Tavern"]
    for sid in ids:
        app.screen(act, sid, buttons=2)
    for i, sid in enumerate(ids):
        app.go(sid, 0, ids[(i + 1) % len(ids)])
        app.go(sid, 1, ids[(i + 3) % len(ids)])
    app.noise = [
        {"kind": "insert_decoration", "probability": 1.0, "target_path": []},
        {"kind": "permute_children", "probability": 1.0, "target_path": [1]},
        {"kind": "duplicate_list_row", "probability": 1.0, "target_path": [1]},
    ]
    return app.doc("NoisyActivity")


def flaky():
    # The shortcut A -> X works once per app instance; B -> X always works.
    app = App("flaky")
    act = app.activity("PortalActivity")
    app.screen(act, "Gate", buttons=2)
    app.screen(act, "Corridor", buttons=2)
    app.screen(act, "Treasure", buttons=1)
    app.screen(act, "Shop", buttons=1)
    app.screen(act, "Exit", buttons=0)
    app.go("Gate", 0, "Treasure", works_times=1)
    app.go("Gate", 1, "Corridor")
    app.go("Corridor", 0, "Treasure")
    app.go("Corridor", 1, "Shop")
    app.go("Shop", 0, "Exit")
    return app.doc("PortalActivity")


def crashy():
    app = App("crashy")
    act = app.activity("PlayerActivity")
    app.screen(act, "Library", buttons=2)
    app.screen(act, "NowPlaying", buttons=2)
    app.screen(act, "Queue", buttons=1)
    app.screen(act, "Equalizer", buttons=1)
    crash = node("ErrorDialog", [leaf("TextView"), leaf("TextView"), leaf("Button")])
    app.screen(act, "CrashReport", buttons=1, extra=[crash])
    app.go("Library", 0, "NowPlaying")
    app.go("Library", 1, "Queue")
    app.go("NowPlaying", 0, "Equalizer")
    app.go("NowPlaying", 1, "Library")
    app.go("Queue", 0, "Library")
    app.go("Equalizer", 0, "CrashReport")
    app.go("CrashReport", 0, "Library")
    return app.doc("PlayerActivity")


def mall():
    # Larger app: 6 departments x 7 screens plus a front door.
    app = App("mall")
    front = app.activity("FrontActivity")
    depts = ["Books", "Music", "Garden", "Toys", "Tools", "Sports"]
    app.screen(front, "Entrance", buttons=len(depts))
    for d, dept in enumerate(depts):
        act = app.activity(dept + "Activity")
        ids = [dept + suffix for suffix in
               ("Aisle", "ShelfA", "ShelfB", "Product", "Reviews", "Cart", "Checkout")]
        for k, sid in enumerate(ids):
            app.screen(act, sid, buttons=2, variant=d * 7 + k)
        app.go("Entrance", d, ids[0])
        app.go(ids[0], 0, ids[1])
        app.go(ids[0], 1, ids[2])
        app.go(ids[1], 0, ids[3])
        app.go(ids[1], 1, ids[0])
        app.go(ids[2], 0, ids[3])
        app.go(ids[2], 1, "Entrance")
        app.go(ids[3], 0, ids[4])
        app.go(ids[3], 1, ids[5])
        app.go(ids[4], 0, ids[3])
        app.go(ids[4], 1, ids[0])
        app.go(ids[5], 0, ids[6])
        app.go(ids[5], 1, ids[3])
        app.go(ids[6], 0, "Entrance")
        app.button(ids[6], 1, "noop", action="long_tap")
    return app.doc("FrontActivity")


APPS = {
    "newsreader": newsreader,
    "linear": linear,
    "cycle": cycle,
    "twenty": twenty,
    "profile": profile,
    "webview": webview,
    "listdup": listdup,
    "deep": deep,
    "hostile": hostile,
    "flaky": flaky,
    "crashy": crashy,
    "mall": mall,
}


def main():
    out = sys.argv[1] if len(sys.argv) > 1 else os.path.join(
        os.path.dirname(os.path.abspath(__file__)), "..", "corpus")
    os.makedirs(out, exist_ok=True)
    for name, build in APPS.items():
        with open(os.path.join(out, name + ".json"), "w") as f:
            json.dump(build(), f, indent=1)
            f.write("\n")


if __name__ == "__main__":
    main()

#!/usr/bin/env python3
"""Writes the bundled fixture corpus: OBJ meshes plus one JSON file per room.

Units are centimeters, +Z is up and the floor slab's top face is z = 0.
Supported objects rest GAP above their support so nothing touches.
"""

import json
import math
import os
import sys

GAP = 0.005
ALL = ["gravity", "intersection", "pose", "size", "co_occurrence_location", "co_occurrence_rotation"]
ROUND = ALL[:5]


def box(x0, y0, z0, x1, y1, z1):
    v = [(x, y, z) for z in (z0, z1) for y in (y0, y1) for x in (x0, x1)]
    f = [
        (0, 2, 1), (1, 2, 3),  # bottom
        (4, 5, 6), (5, 7, 6),  # top
        (0, 1, 4), (1, 5, 4),  # front
        (2, 6, 3), (3, 6, 7),  # back
        (0, 4, 2), (2, 4, 6),  # left
        (1, 3, 5), (3, 7, 5),  # right
    ]
    return v, f


def cylinder(r, z0, z1, n=16, cx=0.0, cy=0.0):
    v = []
    for z in (z0, z1):
        for i in range(n):
            a = 2 * math.pi * i / n
            v.append((cx + r * math.cos(a), cy + r * math.sin(a), z))
    v.append((cx, cy, z0))
    v.append((cx, cy, z1))
    bc, tc = 2 * n, 2 * n + 1
    f = []
    for i in range(n):
        j = (i + 1) % n
        f += [(i, j, n + i), (j, n + j, n + i)]
        f.append((bc, j, i))
        f.append((tc, n + i, n + j))
    return v, f


def merge(*parts):
    verts, faces = [], []
    for v, f in parts:
        off = len(verts)
        verts += v
        faces += [tuple(i + off for i in t) for t in f]
    return verts, faces


def centered_box(w, d, h):
    return box(-w / 2, -d / 2, 0, w / 2, d / 2, h)


def table(w, d, h, top=3.0, leg=4.0):
    parts = [box(-w / 2, -d / 2, h - top, w / 2, d / 2, h)]
    for sx in (-1, 1):
        for sy in (-1, 1):
            x = sx * (w / 2 - leg)
            y = sy * (d / 2 - leg)
            parts.append(box(x - leg / 2, y - leg / 2, 0, x + leg / 2, y + leg / 2, h - top))
    return merge(*parts)


def chair(w=44, d=44, seat=45, back=90):
    parts = [box(-w / 2, -d / 2, seat - 4, w / 2, d / 2, seat)]
    for sx in (-1, 1):
        for sy in (-1, 1):
            x, y = sx * (w / 2 - 3), sy * (d / 2 - 3)
            parts.append(box(x - 2, y - 2, 0, x + 2, y + 2, seat - 4))
    parts.append(box(-w / 2, d / 2 - 4, seat, w / 2, d / 2, back))
    return merge(*parts)


def sofa(w=200, d=90):
    return merge(
        box(-w / 2, -d / 2, 0, w / 2, d / 2, 42),
        box(-w / 2, d / 2 - 20, 42, w / 2, d / 2, 85),
        box(-w / 2, -d / 2, 42, -w / 2 + 18, d / 2 - 20, 62),
        box(w / 2 - 18, -d / 2, 42, w / 2, d / 2 - 20, 62),
    )


def shelf(w=80, d=30, h=180, boards=5):
    parts = [
        box(-w / 2, -d / 2, 0, -w / 2 + 2, d / 2, h),
        box(w / 2 - 2, -d / 2, 0, w / 2, d / 2, h),
        box(-w / 2 + 2, d / 2 - 1, 0, w / 2 - 2, d / 2, h),
    ]
    for i in range(boards):
        z = i * (h - 2) / (boards - 1)
        parts.append(box(-w / 2 + 2, -d / 2, z, w / 2 - 2, d / 2 - 1, z + 2))
    return merge(*parts)


def monitor():
    return merge(box(-10, -8, 0, 10, 8, 2), box(-2, -2, 2, 2, 2, 12), box(-28, -2, 12, 28, 2, 46))


def lamp(h=150):
    return merge(cylinder(14, 0, 3), cylinder(1.5, 3, h - 25, n=8), cylinder(18, h - 25, h))


def mug():
    return merge(cylinder(4.5, 0, 10), box(4.5, -0.8, 2.5, 7.5, 0.8, 7.5))


def laptop():
    return merge(box(-17, -12, 0, 17, 12, 2), box(-17, 10, 2, 17, 12, 24))


MESHES = {
    "floor": lambda: box(-200, -200, -2, 200, 200, 0),
    "wall_back": lambda: box(-210, 200, 0, 200, 210, 250),
    "wall_left": lambda: box(-210, -200, 0, -200, 199.5, 250),
    "dining_table": lambda: table(160, 90, 75),
    "desk": lambda: table(140, 70, 74, top=3, leg=5),
    "coffee_table": lambda: table(110, 60, 42, top=4, leg=5),
    "nightstand": lambda: centered_box(45, 40, 55),
    "dresser": lambda: centered_box(120, 50, 90),
    "cabinet": lambda: centered_box(90, 45, 110),
    "tv_stand": lambda: centered_box(150, 45, 50),
    "bed": lambda: merge(box(-80, -100, 0, 80, 100, 50), box(-80, 95, 50, 80, 100, 110)),
    "chair": chair,
    "armchair": lambda: sofa(90, 85),
    "sofa": sofa,
    "stool": lambda: merge(cylinder(17, 60, 64), cylinder(2, 0, 60, n=8)),
    "bookshelf": shelf,
    "tray": lambda: centered_box(45, 32, 2),
    "plate": lambda: cylinder(12, 0, 2),
    "bowl": lambda: cylinder(8, 0, 6),
    "cup": lambda: cylinder(4, 0, 10),
    "mug": mug,
    "fork": lambda: centered_box(2.5, 19, 0.6),
    "book": lambda: centered_box(16, 24, 4),
    "monitor": monitor,
    "keyboard": lambda: centered_box(44, 14, 3),
    "tv": lambda: merge(box(-15, -10, 0, 15, 10, 3), box(-55, -3, 3, 55, 3, 68)),
    "vase": lambda: cylinder(7, 0, 28),
    "plant": lambda: merge(cylinder(15, 0, 30), box(-18, -18, 30, 18, 18, 80)),
    "lamp": lamp,
    "table_lamp": lambda: lamp(45),
    "clock": lambda: centered_box(12, 6, 10),
    "pillow": lambda: centered_box(50, 30, 12),
    "laptop": laptop,
    "trash_bin": lambda: cylinder(14, 0, 35),
    "remote": lambda: centered_box(5, 16, 2),
}

SIZE = {
    "floor": "large", "wall": "large", "table": "large", "dining_table": "large", "desk": "large", "bed": "large",
    "sofa": "large", "bookshelf": "large", "dresser": "large", "cabinet": "large", "tv_stand": "large",
    "coffee_table": "medium", "chair": "medium", "armchair": "medium", "nightstand": "medium",
    "stool": "medium", "monitor": "medium", "tv": "medium", "lamp": "medium", "plant": "medium",
    "trash_bin": "medium",
}
ROUND_CLASSES = {"plate", "bowl", "cup", "vase", "trash_bin", "stool"}
FIXED = {"floor", "wall"}
# Height of the surface things rest on, where it is not the mesh top.
SUPPORT_TOP = {"chair": 45.0, "bed": 50.0, "sofa": 42.0, "armchair": 42.0}


def mesh_top(name):
    v, _ = MESHES[name]()
    return max(p[2] for p in v)


def quat_z(deg):
    a = math.radians(deg) / 2
    return [math.cos(a), 0.0, 0.0, math.sin(a)]


class Room:
    def __init__(self, name):
        self.name = name
        self.objects = []
        self.deps = []
        self.tops = {}
        for oid, mesh in [("floor", "floor"), ("wall_back", "wall_back"), ("wall_left", "wall_left")]:
            cls = "floor" if oid == "floor" else "wall"
            self.add_raw(oid, cls, mesh, (0, 0, 0))
            self.tops[oid] = 0.0

    def add_raw(self, oid, cls, mesh, pos, yaw=0.0):
        allowed = [] if cls in FIXED else (ROUND if cls in ROUND_CLASSES else ALL)
        self.objects.append({
            "id": oid,
            "class": cls,
            "size_category": SIZE.get(cls, "small"),
            "mesh": f"meshes/{mesh}.obj",
            "pose": {"translation": list(pos), "rotation": quat_z(yaw), "scale": [1.0, 1.0, 1.0]},
            "allowed_transforms": allowed,
        })
        self.tops[oid] = pos[2] + SUPPORT_TOP.get(mesh, mesh_top(mesh))

    def add(self, oid, mesh, x, y, on="floor", yaw=0.0, cls=None):
        z = self.tops[on] + GAP
        self.add_raw(oid, cls or mesh, mesh, (x, y, z), yaw)
        if on != "floor":
            self.deps.append([on, oid])

    def write(self, out_dir):
        doc = {
            "schema_version": 1,
            "name": self.name,
            "units": "cm",
            "up_axis": "Z",
            "objects": self.objects,
            "dependencies": self.deps,
        }
        with open(os.path.join(out_dir, f"{self.name}.json"), "w") as fh:
            json.dump(doc, fh, indent=2)
            fh.write("\n")


def kitchen():
    r = Room("kitchen")
    r.add("table", "dining_table", 0, 20, cls="table")
    r.add("tray", "tray", 10, 25, on="table")
    r.add("cup", "cup", 15, 25, on="tray")
    r.add("chair_1", "chair", -40, -50, yaw=180)
    r.add("chair_2", "chair", 40, -50, yaw=180)
    r.add("cabinet", "cabinet", 120, 160)
    r.add("stool", "stool", -130, -60)
    return r


def office():
    r = Room("office")
    r.add("desk", "desk", 0, 140)
    r.add("monitor", "monitor", 0, 155, on="desk")
    r.add("keyboard", "keyboard", 0, 125, on="desk")
    r.add("mug", "mug", 45, 130, on="desk")
    r.add("laptop", "laptop", -45, 130, on="desk")
    r.add("chair", "chair", 0, 80, yaw=180)
    r.add("bookshelf", "bookshelf", -165, 60, yaw=90)
    r.add("book", "book", -165, 60, on="bookshelf")
    r.add("lamp", "lamp", 120, 150)
    r.add("trash_bin", "trash_bin", 110, 60)
    r.add("plant", "plant", -150, -120)
    return r


def living():
    r = Room("living_room")
    r.add("sofa", "sofa", 0, 130)
    r.add("pillow", "pillow", -40, 135, on="sofa")
    r.add("coffee_table", "coffee_table", 0, 30)
    r.add("vase", "vase", -25, 30, on="coffee_table")
    r.add("remote", "remote", 25, 30, on="coffee_table")
    r.add("book", "book", 5, 20, on="coffee_table")
    r.add("armchair", "armchair", 140, 20, yaw=90)
    r.add("tv_stand", "tv_stand", 0, -150)
    r.add("tv", "tv", 0, -150, on="tv_stand", yaw=180)
    r.add("plant", "plant", -160, 150)
    r.add("lamp", "lamp", 150, 150)
    return r


def bedroom():
    r = Room("bedroom")
    r.add("bed", "bed", 0, 90)
    r.add("pillow_1", "pillow", -35, 160, on="bed", cls="pillow")
    r.add("pillow_2", "pillow", 35, 160, on="bed", cls="pillow")
    r.add("laptop", "laptop", 10, 60, on="bed")
    r.add("nightstand", "nightstand", 120, 165)
    r.add("table_lamp", "table_lamp", 120, 165, on="nightstand", cls="lamp")
    r.add("clock", "clock", 130, 150, on="nightstand")
    r.add("dresser", "dresser", -130, -130, yaw=90)
    r.add("bowl", "bowl", -130, -150, on="dresser")
    r.add("chair", "chair", 110, -60)
    r.add("book", "book", 110, -60, on="chair")
    return r


def dining():
    r = Room("dining_room")
    r.add("table", "dining_table", 0, 0, cls="table")
    r.add("plate_1", "plate", -40, 0, on="table", cls="plate")
    r.add("fork_1", "fork", -40, 0, on="plate_1", cls="fork")
    r.add("plate_2", "plate", 40, 0, on="table", cls="plate")
    r.add("bowl", "bowl", 0, 10, on="table")
    r.add("vase", "vase", 0, -20, on="table")
    for i, (x, y, yaw) in enumerate([(-40, -70, 180), (40, -70, 180), (-40, 70, 0), (40, 70, 0)]):
        r.add(f"chair_{i + 1}", "chair", x, y, yaw=yaw, cls="chair")
    r.add("cabinet", "cabinet", -120, 160)
    return r


def main(out_dir):
    mesh_dir = os.path.join(out_dir, "meshes")
    os.makedirs(mesh_dir, exist_ok=True)
    for name, build in MESHES.items():
        v, f = build()
        with open(os.path.join(mesh_dir, f"{name}.obj"), "w") as fh:
            fh.write(f"o {name}\n")
            for p in v:
                fh.write("v {:.6f} {:.6f} {:.6f}\n".format(*p))
            for t in f:
                fh.write("f {} {} {}\n".format(*(i + 1 for i in t)))
    for room in (kitchen(), office(), living(), bedroom(), dining()):
        room.write(out_dir)


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else os.path.join(os.path.dirname(__file__), "..", "fixtures"))

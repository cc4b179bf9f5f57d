"""Write the mixed quad/triangle channel mesh used by configs/sme_2d_channel.json.

The rectangle [0, 10] x [0, 2] is split into nx x ny quads; every other quad
in a checkerboard is cut into two triangles so both cell types get exercised.
Sides are tagged left, right, bottom, top.

    python3 demos/make_channel_mesh.py configs/meshes/channel.msh
"""
import sys

import numpy as np


def channel_msh(nx=40, ny=8, length=10.0, width=2.0) -> str:
    xs, ys = np.linspace(0, length, nx + 1), np.linspace(0, width, ny + 1)
    nid = lambda i, j: 1 + j * (nx + 1) + i
    nodes = [f"{nid(i, j)} {x:.17g} {y:.17g} 0" for j, y in enumerate(ys) for i, x in enumerate(xs)]
    elems = []

    def add(etype, tag, verts):
        elems.append((etype, tag, verts))

    for i in range(nx):
        add(1, 1, (nid(i, 0), nid(i + 1, 0)))
        add(1, 2, (nid(i + 1, ny), nid(i, ny)))
    for j in range(ny):
        add(1, 3, (nid(0, j + 1), nid(0, j)))
        add(1, 4, (nid(nx, j), nid(nx, j + 1)))
    for j in range(ny):
        for i in range(nx):
            a, b, c, d = nid(i, j), nid(i + 1, j), nid(i + 1, j + 1), nid(i, j + 1)
            if (i + j) % 2:
                add(2, 5, (a, b, c))
                add(2, 5, (a, c, d))
            else:
                add(3, 5, (a, b, c, d))
    out = ["$MeshFormat", "2.2 0 8", "$EndMeshFormat",
           "$PhysicalNames", "5",
           '1 1 "bottom"', '1 2 "top"', '1 3 "left"', '1 4 "right"', '2 5 "water"',
           "$EndPhysicalNames", "$Nodes", str(len(nodes)), *nodes, "$EndNodes",
           "$Elements", str(len(elems))]
    for k, (etype, tag, verts) in enumerate(elems, 1):
        out.append(f"{k} {etype} 2 {tag} {tag} " + " ".join(map(str, verts)))
    out.append("$EndElements")
    return "\n".join(out) + "\n"


if __name__ == "__main__":
    path = sys.argv[1] if len(sys.argv) > 1 else "channel.msh"
    with open(path, "w") as f:
        f.write(channel_msh())
    print(f"wrote {path}")

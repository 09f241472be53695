"""
Direct evaluations of every loss, metric and transform by plain loops over pixels,
classes and pixel pairs, kept free of the library's vectorised helpers.
"""

import math


def cost(r, s):
    return max(0, abs(r - s) - 1)


def pixels(grid):
    height, width = len(grid), len(grid[0])
    for i in range(height):
        for j in range(width):
            yield i, j


def ce(probs, labels):
    total, count = 0.0, 0
    for i, j in pixels(labels):
        total -= math.log(max(probs[i][j][labels[i][j] - 1], 1e-12))
        count += 1
    return total / count


def hinge(x):
    return x if x > 0 else 0.0


def qul_pixel(p, k_star, delta, lam):
    k_classes = len(p)
    value = 0.0
    if k_star - 1 >= 1:
        value += hinge(delta + p[k_star - 2] - p[k_star - 1])
    if k_star + 1 <= k_classes:
        value += hinge(delta + p[k_star] - p[k_star - 1])
    for k in range(1, k_star - 1):
        value += lam * hinge(delta + p[k - 1] - p[k_star - 2])
    for k in range(k_star + 2, k_classes + 1):
        value += lam * hinge(delta + p[k - 1] - p[k_star])
    return value


def qul(probs, labels, delta=0.05, lam=1.0):
    values = [qul_pixel(probs[i][j], labels[i][j], delta, lam) for i, j in pixels(labels)]
    return sum(values) / len(values)


def expmse(probs, labels, lam=1.0):
    values = []
    for i, j in pixels(labels):
        p = probs[i][j]
        mean = sum((k + 1) * p[k] for k in range(len(p)))
        variance = sum(p[k] * (k + 1 - mean) ** 2 for k in range(len(p)))
        values.append((mean - labels[i][j]) ** 2 + lam * variance)
    return sum(values) / len(values)


def o2_pixel(p, k_star, delta):
    value = 0.0
    for k in range(2, k_star + 1):
        value += hinge(delta + p[k - 2] - p[k - 1])
    for k in range(k_star, len(p)):
        value += hinge(delta + p[k] - p[k - 1])
    return value


def o2(probs, labels, delta=0.05):
    values = [o2_pixel(probs[i][j], labels[i][j], delta) for i, j in pixels(labels)]
    return sum(values) / len(values)


def neighbour_pairs(height, width):
    pairs = []
    for i in range(height):
        for j in range(width):
            if j + 1 < width:
                pairs.append(((i, j), (i, j + 1)))
            if i + 1 < height:
                pairs.append(((i, j), (i + 1, j)))
    return pairs


def csnp(probs):
    height, width, k_classes = len(probs), len(probs[0]), len(probs[0][0])
    pairs = neighbour_pairs(height, width)
    if not pairs:
        return 0.0
    total = 0.0
    for (a, b) in pairs:
        pa, pb = probs[a[0]][a[1]], probs[b[0]][b[1]]
        for r in range(1, k_classes + 1):
            for s in range(1, k_classes + 1):
                total += pa[r - 1] * cost(r, s) * pb[s - 1]
    return total / len(pairs)


def edt(mask):
    """Distance from every pixel to the nearest true pixel, by scanning all pairs."""
    height, width = len(mask), len(mask[0])
    inside = [(i, j) for i, j in pixels(mask) if mask[i][j]]
    field = [[math.inf] * width for _ in range(height)]
    for i, j in pixels(mask):
        for a, b in inside:
            field[i][j] = min(field[i][j], math.sqrt((i - a) ** 2 + (j - b) ** 2))
    return field


def saturated(mask, gamma):
    field = edt(mask)
    return [[min(value, gamma) for value in row] for row in field]


def signed(mask, gamma_hat):
    outside = [[not value for value in row] for row in mask]
    to_region, to_outside = edt(mask), edt(outside)
    field = []
    for i, row in enumerate(mask):
        field.append([])
        for j, value in enumerate(row):
            magnitude = to_outside[i][j] if value else to_region[i][j]
            field[-1].append(
                (1 if value else -1) * min(magnitude, gamma_hat)
            )
    return field


def class_mask(probs, k, delta):
    return [[pixel[k - 1] >= delta for pixel in row] for row in probs]


def csdt(probs, delta=0.05, gamma=5.0):
    height, width, k_classes = len(probs), len(probs[0]), len(probs[0][0])
    fields = {k: saturated(class_mask(probs, k, delta), gamma) for k in range(1, k_classes + 1)}
    total = 0.0
    for k1 in range(1, k_classes + 1):
        for k2 in range(k1 + 2, k_classes + 1):
            for i, j in pixels(probs):
                total += cost(k1, k2) * (
                    probs[i][j][k1 - 1] * fields[k2][i][j]
                    + probs[i][j][k2 - 1] * fields[k1][i][j]
                )
    return -total / (height * width)


def cssdf(probs, labels, delta=0.05, gamma_decay=0.5, gamma_hat=None, p=1):
    height, width, k_classes = len(probs), len(probs[0]), len(probs[0][0])
    if gamma_hat is None:
        gamma_hat = math.hypot(height, width)
    predicted, truth, alpha = {}, {}, {}
    for k in range(1, k_classes + 1):
        predicted[k] = signed(class_mask(probs, k, delta), gamma_hat)
        truth[k] = signed([[label == k for label in row] for row in labels], gamma_hat)
        alpha[k] = [[math.exp(-gamma_decay * abs(v)) for v in row] for row in predicted[k]]

    total = 0.0
    for k1 in range(1, k_classes + 1):
        for k2 in range(k1 + 2, k_classes + 1):
            for i, j in pixels(labels):
                total += cost(k1, k2) * (
                    alpha[k1][i][j] * abs(truth[k2][i][j] - predicted[k2][i][j]) ** p
                    + alpha[k2][i][j] * abs(truth[k1][i][j] - predicted[k1][i][j]) ** p
                )
    return total / (height * width)


def unimodal(p):
    """Some split point m has p non-decreasing up to m and non-increasing after."""
    for m in range(len(p)):
        rising = all(p[k] <= p[k + 1] for k in range(m))
        falling = all(p[k] >= p[k + 1] for k in range(m, len(p) - 1))
        if rising and falling:
            return True
    return False


def up(probs):
    flags = [unimodal(probs[i][j]) for i, j in pixels(probs)]
    return sum(flags) / len(flags)


def cs(labels, epsilon=1e-8):
    height, width = len(labels), len(labels[0])
    h_invalid = h_any = v_invalid = v_any = 0
    for i in range(height):
        for j in range(width):
            if j + 1 < width:
                step = abs(labels[i][j] - labels[i][j + 1])
                h_any += step >= 1
                h_invalid += step >= 2
            if i + 1 < height:
                step = abs(labels[i][j] - labels[i + 1][j])
                v_any += step >= 1
                v_invalid += step >= 2
    return 0.5 * (h_invalid / (h_any + epsilon) + v_invalid / (v_any + epsilon))


def dice(pred, gt, k_classes):
    scores = []
    for k in range(1, k_classes + 1):
        both = in_pred = in_gt = 0
        for i, j in pixels(gt):
            in_pred += pred[i][j] == k
            in_gt += gt[i][j] == k
            both += pred[i][j] == k and gt[i][j] == k
        if in_pred + in_gt:
            scores.append(2 * both / (in_pred + in_gt))
    return sum(scores) / len(scores)

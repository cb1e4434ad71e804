import init, { gaussian_sphere, perturbed_density, ishigami_ofpli } from "./pkg/fisherpli_wasm.js";

const SQRT1_2 = Math.SQRT1_2;

function byId(id) { return document.getElementById(id); }

function frame(ctx, w, h) {
  ctx.clearRect(0, 0, w, h);
  ctx.strokeStyle = "#d7dce2";
  ctx.strokeRect(0.5, 0.5, w - 1, h - 1);
}

function mapper(xmin, xmax, ymin, ymax, w, h, pad) {
  const sx = (w - 2 * pad) / (xmax - xmin || 1);
  const sy = (h - 2 * pad) / (ymax - ymin || 1);
  return {
    x: v => pad + (v - xmin) * sx,
    y: v => h - pad - (v - ymin) * sy,
  };
}

function polyline(ctx, pts, m, color, width = 1) {
  if (pts.length < 2) return;
  ctx.beginPath();
  ctx.moveTo(m.x(pts[0][0]), m.y(pts[0][1]));
  for (const p of pts.slice(1)) ctx.lineTo(m.x(p[0]), m.y(p[1]));
  ctx.strokeStyle = color;
  ctx.lineWidth = width;
  ctx.stroke();
}

function axisLabel(ctx, text, x, y) {
  ctx.fillStyle = "#5b6470";
  ctx.font = "12px system-ui";
  ctx.fillText(text, x, y);
}

// Panel 1: geodesic fan in the Poincaré half-plane chart.
function drawGaussianSphere() {
  const delta = Number(byId("g-delta").value);
  const k = Number(byId("g-k").value);
  byId("g-delta-v").value = delta.toFixed(2);
  byId("g-k-v").value = k;
  const data = JSON.parse(gaussian_sphere(0.0, 1.0, delta, k, 600));
  const canvas = byId("g-canvas");
  const ctx = canvas.getContext("2d");
  frame(ctx, canvas.width, canvas.height);
  if (data.error) { byId("g-readout").textContent = data.error; return; }

  // Chart coordinates: (mu/sqrt(2), sigma).
  const chart = data.trajectories.map(t => t.points.map(q => [q[0] * SQRT1_2, q[1]]));
  let xmin = Infinity, xmax = -Infinity, ymax = 0;
  for (const t of chart) for (const p of t) {
    xmin = Math.min(xmin, p[0]); xmax = Math.max(xmax, p[0]); ymax = Math.max(ymax, p[1]);
  }
  const span = Math.max(xmax - xmin, ymax) * 0.08;
  const m = mapper(xmin - span, xmax + span, 0, ymax + span, canvas.width, canvas.height, 28);

  for (const t of chart) polyline(ctx, t, m, "rgba(31,111,235,0.45)");
  const endpoints = chart.map(t => t[t.length - 1]);
  polyline(ctx, endpoints.concat([endpoints[0]]), m, "#d1242f", 1.6);
  ctx.fillStyle = "#1b1f24";
  ctx.beginPath();
  ctx.arc(m.x(0), m.y(1), 3.5, 0, 2 * Math.PI);
  ctx.fill();
  axisLabel(ctx, "μ/√2", canvas.width - 50, canvas.height - 10);
  axisLabel(ctx, "σ", 10, 18);

  const worst = Math.max(...data.oracle_distances.map(d => Math.abs(d - delta)));
  byId("g-readout").innerHTML =
    `endpoints at closed-form distance δ ± <b>${worst.toExponential(1)}</b>; ` +
    `max Hamiltonian drift <b>${Math.max(...data.trajectories.map(t => t.max_drift)).toExponential(1)}</b>`;
}

// Panel 2: nominal vs perturbed pdf.
function drawPerturbed() {
  const spec = byId("d-family").value;
  const delta = Number(byId("d-delta").value);
  const angle = Number(byId("d-angle").value);
  byId("d-delta-v").value = delta.toFixed(2);
  byId("d-angle-v").value = angle.toFixed(2);
  const data = JSON.parse(perturbed_density(spec, delta, angle, 600, 241));
  const canvas = byId("d-canvas");
  const ctx = canvas.getContext("2d");
  frame(ctx, canvas.width, canvas.height);
  if (data.error) { byId("d-readout").textContent = data.error; return; }

  const ymax = Math.max(...data.nominal, ...data.perturbed) * 1.08;
  const m = mapper(data.x[0], data.x[data.x.length - 1], 0, ymax, canvas.width, canvas.height, 28);
  polyline(ctx, data.x.map((x, i) => [x, data.nominal[i]]), m, "#1b1f24", 1.4);
  polyline(ctx, data.x.map((x, i) => [x, data.perturbed[i]]), m, "#d1242f", 1.6);
  axisLabel(ctx, "x", canvas.width - 20, canvas.height - 10);

  const th = data.perturbed_theta.map(v => v.toPrecision(4)).join(", ");
  byId("d-readout").innerHTML =
    `perturbed θ = (<b>${th}</b>) · KL(f<sub>δ</sub>‖f) = <b>${data.kl.toPrecision(3)}</b> · ` +
    `black: nominal, red: perturbed`;
}

// Panel 3: PLI around the sphere.
function drawIshigami() {
  const delta = Number(byId("i-delta").value);
  const k = Number(byId("i-k").value);
  const seed = Number(byId("i-seed").value) >>> 0;
  byId("i-delta-v").value = delta.toFixed(2);
  byId("i-k-v").value = k;
  const data = JSON.parse(ishigami_ofpli(delta, k, 2000, BigInt(seed)));
  const canvas = byId("i-canvas");
  const ctx = canvas.getContext("2d");
  frame(ctx, canvas.width, canvas.height);
  if (data.error) { byId("i-readout").textContent = data.error; return; }

  const lo = Math.min(...data.pli, 0), hi = Math.max(...data.pli, 0);
  const pad = (hi - lo) * 0.1 + 1e-6;
  const m = mapper(0, 2 * Math.PI, lo - pad, hi + pad, canvas.width, canvas.height, 30);
  // Zero line.
  ctx.strokeStyle = "#d7dce2";
  ctx.beginPath();
  ctx.moveTo(m.x(0), m.y(0));
  ctx.lineTo(m.x(2 * Math.PI), m.y(0));
  ctx.stroke();
  const pts = data.angles.map((a, i) => [a, data.pli[i]]);
  polyline(ctx, pts, m, "#1f6feb", 1.6);
  ctx.fillStyle = "#d1242f";
  for (const [a, s] of pts) {
    if (s === data.s_plus || s === data.s_minus) {
      ctx.beginPath();
      ctx.arc(m.x(a), m.y(s), 4, 0, 2 * Math.PI);
      ctx.fill();
    }
  }
  axisLabel(ctx, "sphere angle", canvas.width / 2 - 30, canvas.height - 8);
  axisLabel(ctx, "PLI", 8, 16);

  const amax = data.argmax_theta.map(v => v.toPrecision(3)).join(", ");
  const amin = data.argmin_theta.map(v => v.toPrecision(3)).join(", ");
  byId("i-readout").innerHTML =
    `S⁺ = <b>${data.s_plus.toPrecision(3)}</b> at θ = (${amax}) · ` +
    `S⁻ = <b>${data.s_minus.toPrecision(3)}</b> at θ = (${amin})`;
}

function debounce(fn, ms) {
  let t;
  return () => { clearTimeout(t); t = setTimeout(fn, ms); };
}

await init();
for (const id of ["g-delta", "g-k"]) byId(id).addEventListener("input", drawGaussianSphere);
for (const id of ["d-family", "d-delta", "d-angle"]) byId(id).addEventListener("input", drawPerturbed);
const redraw3 = debounce(drawIshigami, 150);
for (const id of ["i-delta", "i-k", "i-seed"]) {
  byId(id).addEventListener("input", () => {
    byId("i-readout").textContent = "computing…";
    redraw3();
  });
}
drawGaussianSphere();
drawPerturbed();
drawIshigami();

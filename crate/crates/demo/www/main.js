import init, {
  tikhonov_curve,
  multiplicity_heatmap,
  semilinear_counterexample,
} from "./pkg/tracklab_demo.js";

const $ = (id) => document.getElementById(id);
const num = (id) => parseFloat($(id).value);

function frame(canvas, xs, ys) {
  const ctx = canvas.getContext("2d");
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  const pad = 40;
  const [x0, x1] = [Math.min(...xs), Math.max(...xs)];
  let [y0, y1] = [Math.min(...ys), Math.max(...ys)];
  if (y0 === y1) { y0 -= 1; y1 += 1; }
  const sx = (x) => pad + ((x - x0) / (x1 - x0 || 1)) * (canvas.width - 2 * pad);
  const sy = (y) => canvas.height - pad - ((y - y0) / (y1 - y0)) * (canvas.height - 2 * pad);
  ctx.strokeStyle = "#999";
  ctx.strokeRect(pad, pad, canvas.width - 2 * pad, canvas.height - 2 * pad);
  ctx.fillStyle = "#333";
  ctx.font = "12px sans-serif";
  ctx.fillText(x0.toPrecision(3), pad, canvas.height - pad + 15);
  ctx.fillText(x1.toPrecision(3), canvas.width - pad - 30, canvas.height - pad + 15);
  ctx.fillText(y1.toPrecision(3), 2, pad + 4);
  ctx.fillText(y0.toPrecision(3), 2, canvas.height - pad);
  return { ctx, sx, sy };
}

function drawCurve() {
  const rows = JSON.parse(
    tikhonov_curve($("curve-map").value, num("curve-yd"), num("curve-ud"), num("curve-lo"), num("curve-hi"), 60),
  );
  const xs = rows.map((r) => Math.log10(r.nu));
  const ys = rows.flatMap((r) => r.minimizers);
  const { ctx, sx, sy } = frame($("curve"), xs, ys);
  ctx.fillStyle = "#1f5fa8";
  rows.forEach((r) => {
    r.minimizers.forEach((u) => {
      ctx.beginPath();
      ctx.arc(sx(Math.log10(r.nu)), sy(u), 3, 0, 2 * Math.PI);
      ctx.fill();
    });
  });
  ctx.fillStyle = "#333";
  ctx.fillText("log10 ν", $("curve").width / 2, $("curve").height - 8);
}

function drawHeat() {
  const res = Math.round(num("heat-res"));
  const data = JSON.parse(multiplicity_heatmap($("heat-map").value, num("heat-nu"), -1, 2, -1, 1, res));
  const canvas = $("heat");
  const ctx = canvas.getContext("2d");
  const w = canvas.width / data.u_d.length;
  const h = canvas.height / data.y_d.length;
  data.y_d.forEach((_, i) => {
    data.u_d.forEach((_, j) => {
      const m = data.multiplicity[i * data.u_d.length + j];
      ctx.fillStyle = m >= 2 ? "#13315c" : "#e8eef6";
      // y_d grows upwards.
      ctx.fillRect(j * w, canvas.height - (i + 1) * h, Math.ceil(w), Math.ceil(h));
    });
  });
}

function drawSemilinear() {
  const d = JSON.parse(semilinear_counterexample(Math.round(num("semi-n")), num("semi-amp")));
  const series = [
    [d.state_u1, "#1f5fa8", "S(u1)"],
    [d.state_u2, "#a81f3d", "S(u2)"],
    [d.state_midpoint, "#1d8a3a", "S((u1+u2)/2)"],
    [d.chord_midpoint, "#888", "(S(u1)+S(u2))/2"],
  ];
  const { ctx, sx, sy } = frame($("semi"), d.x, series.flatMap((s) => s[0]));
  series.forEach(([ys, color, label], k) => {
    ctx.strokeStyle = color;
    ctx.beginPath();
    ys.forEach((y, i) => (i ? ctx.lineTo(sx(d.x[i]), sy(y)) : ctx.moveTo(sx(d.x[i]), sy(y))));
    ctx.stroke();
    ctx.fillStyle = color;
    ctx.fillText(label, 50, 55 + 15 * k);
  });
  $("semi-defect").textContent = `midpoint defect ‖S((u1+u2)/2) − (S(u1)+S(u2))/2‖ = ${d.defect.toExponential(4)}`;
}

function guarded(f) {
  return () => {
    try {
      $("status").textContent = "";
      f();
    } catch (e) {
      $("status").textContent = String(e);
    }
  };
}

await init();
$("curve-run").onclick = guarded(drawCurve);
$("heat-run").onclick = guarded(drawHeat);
$("semi-run").onclick = guarded(drawSemilinear);
guarded(drawCurve)();
guarded(drawHeat)();
guarded(drawSemilinear)();

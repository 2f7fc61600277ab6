import init, { Explorer } from "./pkg/subtrack_web.js";

const PALETTE = ["#888", "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2"];
const canvas = document.getElementById("view");
const ctx = canvas.getContext("2d");
const log = (s) => { document.getElementById("log").textContent = s; };

let ex = null;
let nviews = 0;

function toData(ev) {
  const r = canvas.getBoundingClientRect();
  const s = r.width / 2;
  return [(ev.clientX - r.left - s) / s, (s - (ev.clientY - r.top)) / s];
}

function draw(frame) {
  const w = canvas.width, h = canvas.height;
  ctx.clearRect(0, 0, w, h);
  let m = 1e-9;
  for (const p of frame.points) if (p.active) m = Math.max(m, Math.abs(p.x), Math.abs(p.y));
  const sc = 0.45 * w / m;
  for (const p of frame.points) {
    if (!p.active) continue;
    ctx.fillStyle = PALETTE[p.color % PALETTE.length];
    ctx.fillRect(w / 2 + p.x * sc - 1.5, h / 2 - p.y * sc - 1.5, 3, 3);
  }
  // labels sit on a ring around the plot at their display angle
  for (const l of frame.labels) {
    if (!l.visible) continue;
    const a = l.display_angle * Math.PI / 180;
    ctx.globalAlpha = l.opacity;
    ctx.font = `${l.font_size}px sans-serif`;
    ctx.fillStyle = "#000";
    ctx.fillText(l.name, w / 2 + Math.cos(a) * 0.47 * w - 10, h / 2 - Math.sin(a) * 0.47 * h);
  }
  ctx.globalAlpha = 1;
}

function refresh() {
  draw(JSON.parse(ex.frame()).frame);
}

function load() {
  ex = new Explorer(document.getElementById("fixture").value, 0);
  nviews = 0;
  document.getElementById("nviews").textContent = "0 views";
  document.getElementById("slider").disabled = true;
  refresh();
}

let drag = null;
canvas.addEventListener("contextmenu", (e) => e.preventDefault());
canvas.addEventListener("mousedown", (e) => {
  drag = { button: e.button === 2 ? "right" : "left", from: toData(e) };
});
canvas.addEventListener("mousemove", (e) => {
  if (!drag) return;
  const to = toData(e);
  try {
    ex.drag(drag.button, drag.from[0], drag.from[1], to[0], to[1], false);
    drag.from = to;
    refresh();
  } catch (err) { log(String(err)); }
});
window.addEventListener("mouseup", (e) => {
  if (!drag) return;
  const to = toData(e);
  try { ex.drag(drag.button, drag.from[0], drag.from[1], to[0], to[1], true); } catch (err) { log(String(err)); }
  drag = null;
  refresh();
});
canvas.addEventListener("wheel", (e) => {
  e.preventDefault();
  const dy = -Math.sign(e.deltaY) * 0.05;
  try { ex.drag("middle", 0, 0, 0, dy, true); refresh(); } catch (err) { log(String(err)); }
});

document.getElementById("reload").onclick = load;
document.getElementById("optimize").onclick = () => {
  try {
    const r = JSON.parse(ex.optimize(document.getElementById("metric").value, document.getElementById("scope").value));
    log(`score ${r.incoming.toFixed(4)} -> ${r.score.toFixed(4)}`);
    draw(r.frame);
  } catch (err) { log(String(err)); }
};
document.getElementById("save").onclick = () => {
  ex.save_view();
  nviews += 1;
  document.getElementById("nviews").textContent = `${nviews} views`;
  const slider = document.getElementById("slider");
  if (nviews >= 2) {
    ex.path_all();
    slider.disabled = false;
    slider.value = 0;
  }
};
document.getElementById("slider").oninput = (e) => {
  try {
    const r = JSON.parse(ex.path_t(e.target.value / 1000));
    draw(r.frame);
  } catch (err) { log(String(err)); }
};

await init();
load();

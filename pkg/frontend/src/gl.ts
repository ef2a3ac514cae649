/** WebGL2 renderer for the street layers.
 *
 * Geometry is uploaded once per bundle (setBundle); pan and zoom only change
 * uniforms. Edge quads carry extrusion baked in Mercator units at the
 * bundle's reference zoom, so projecting them with world_scale(zoom) scales
 * street widths by 2^(zoom - reference_zoom) with no re-tessellation.
 * Sprites (nodes, direction arrows, markers) are instanced quads with
 * procedural glyphs, sized in screen pixels. Draw order: edges, arrows,
 * nodes, markers.
 */

import type { RenderBundle, SpriteSet } from "./bundle.js";
import { project, worldScale, type View } from "./mercator.js";
import type { LayerFlags } from "./protocol.js";

const EDGE_VS = `#version 300 es
precision highp float;
in vec2 a_pos;
in vec4 a_color;
uniform vec2 u_center;
uniform float u_scale;
uniform vec2 u_viewport;
out vec4 v_color;
void main() {
  vec2 screen = (a_pos - u_center) * u_scale + 0.5 * u_viewport;
  vec2 ndc = vec2(screen.x / u_viewport.x * 2.0 - 1.0, 1.0 - screen.y / u_viewport.y * 2.0);
  gl_Position = vec4(ndc, 0.0, 1.0);
  v_color = a_color;
}`;

const EDGE_FS = `#version 300 es
precision mediump float;
in vec4 v_color;
out vec4 outColor;
void main() { outColor = v_color; }`;

const SPRITE_VS = `#version 300 es
precision highp float;
in vec2 a_corner;
in vec2 a_center;
in float a_size;
in float a_rot;
in vec4 a_color;
in float a_icon;
uniform vec2 u_center;
uniform float u_scale;
uniform vec2 u_viewport;
out vec2 v_uv;
out vec4 v_color;
flat out int v_icon;
void main() {
  vec2 screen = (a_center - u_center) * u_scale + 0.5 * u_viewport;
  float c = cos(a_rot);
  float s = sin(a_rot);
  vec2 corner = vec2(a_corner.x * c - a_corner.y * s, a_corner.x * s + a_corner.y * c);
  screen += corner * a_size;
  vec2 ndc = vec2(screen.x / u_viewport.x * 2.0 - 1.0, 1.0 - screen.y / u_viewport.y * 2.0);
  gl_Position = vec4(ndc, 0.0, 1.0);
  v_uv = a_corner;
  v_color = a_color;
  v_icon = int(a_icon + 0.5);
}`;

// icon 0: filled disc, 1: direction arrow (+x), 2: map pin, else disc
const SPRITE_FS = `#version 300 es
precision mediump float;
in vec2 v_uv;
in vec4 v_color;
flat in int v_icon;
out vec4 outColor;
void main() {
  float alpha = 0.0;
  if (v_icon == 1) {
    float halfWidth = 0.35 * (0.5 - v_uv.x);
    alpha = (v_uv.x <= 0.5 && abs(v_uv.y) <= halfWidth) ? 1.0 : 0.0;
  } else if (v_icon == 2) {
    float head = 1.0 - smoothstep(0.26, 0.29, distance(v_uv, vec2(0.0, -0.15)));
    float tail = (v_uv.y > -0.15 && v_uv.y <= 0.5 &&
                  abs(v_uv.x) <= 0.28 * (0.5 - v_uv.y) / 0.65) ? 1.0 : 0.0;
    alpha = max(head, tail);
  } else {
    alpha = 1.0 - smoothstep(0.46, 0.5, length(v_uv));
  }
  if (alpha <= 0.0) discard;
  outColor = vec4(v_color.rgb, v_color.a * alpha);
}`;

function compile(gl: WebGL2RenderingContext, type: number, source: string): WebGLShader {
  const shader = gl.createShader(type)!;
  gl.shaderSource(shader, source);
  gl.compileShader(shader);
  if (!gl.getShaderParameter(shader, gl.COMPILE_STATUS)) {
    throw new Error(`shader compile failed: ${gl.getShaderInfoLog(shader)}`);
  }
  return shader;
}

function link(gl: WebGL2RenderingContext, vs: string, fs: string): WebGLProgram {
  const program = gl.createProgram()!;
  gl.attachShader(program, compile(gl, gl.VERTEX_SHADER, vs));
  gl.attachShader(program, compile(gl, gl.FRAGMENT_SHADER, fs));
  gl.linkProgram(program);
  if (!gl.getProgramParameter(program, gl.LINK_STATUS)) {
    throw new Error(`program link failed: ${gl.getProgramInfoLog(program)}`);
  }
  return program;
}

interface SpriteBuffers {
  vao: WebGLVertexArrayObject;
  count: number;
}

export class GlRenderer {
  private gl: WebGL2RenderingContext;
  private edgeProgram: WebGLProgram;
  private spriteProgram: WebGLProgram;
  private cornerBuffer: WebGLBuffer;
  private edgeVao: WebGLVertexArrayObject | null = null;
  private edgeIndexCount = 0;
  private nodes: SpriteBuffers | null = null;
  private arrows: SpriteBuffers | null = null;
  private markers: SpriteBuffers | null = null;
  /** Counts buffer uploads; pan/zoom must leave it unchanged. */
  uploads = 0;

  constructor(canvas: HTMLCanvasElement) {
    const gl = canvas.getContext("webgl2", { antialias: true, alpha: true });
    if (!gl) throw new Error("WebGL2 is required");
    this.gl = gl;
    this.edgeProgram = link(gl, EDGE_VS, EDGE_FS);
    this.spriteProgram = link(gl, SPRITE_VS, SPRITE_FS);
    this.cornerBuffer = gl.createBuffer()!;
    gl.bindBuffer(gl.ARRAY_BUFFER, this.cornerBuffer);
    gl.bufferData(
      gl.ARRAY_BUFFER,
      new Float32Array([-0.5, -0.5, 0.5, -0.5, -0.5, 0.5, 0.5, 0.5]),
      gl.STATIC_DRAW,
    );
    gl.enable(gl.BLEND);
    gl.blendFunc(gl.SRC_ALPHA, gl.ONE_MINUS_SRC_ALPHA);
  }

  setBundle(bundle: RenderBundle): void {
    const { gl } = this;
    this.edgeVao = gl.createVertexArray();
    gl.bindVertexArray(this.edgeVao);
    const positions = gl.createBuffer()!;
    gl.bindBuffer(gl.ARRAY_BUFFER, positions);
    gl.bufferData(gl.ARRAY_BUFFER, bundle.edgePositions, gl.STATIC_DRAW);
    const posLoc = gl.getAttribLocation(this.edgeProgram, "a_pos");
    gl.enableVertexAttribArray(posLoc);
    gl.vertexAttribPointer(posLoc, 2, gl.FLOAT, false, 0, 0);
    const colors = gl.createBuffer()!;
    gl.bindBuffer(gl.ARRAY_BUFFER, colors);
    gl.bufferData(gl.ARRAY_BUFFER, bundle.edgeColors, gl.STATIC_DRAW);
    const colorLoc = gl.getAttribLocation(this.edgeProgram, "a_color");
    gl.enableVertexAttribArray(colorLoc);
    gl.vertexAttribPointer(colorLoc, 4, gl.UNSIGNED_BYTE, true, 0, 0);
    const indexBuffer = gl.createBuffer()!;
    gl.bindBuffer(gl.ELEMENT_ARRAY_BUFFER, indexBuffer);
    gl.bufferData(gl.ELEMENT_ARRAY_BUFFER, bundle.edgeIndices, gl.STATIC_DRAW);
    this.edgeIndexCount = bundle.edgeIndices.length;
    gl.bindVertexArray(null);

    this.nodes = this.uploadSprites(bundle.nodes);
    this.arrows = this.uploadSprites(bundle.arrows);
    this.markers = this.uploadSprites(bundle.markers);
    this.uploads++;
  }

  private uploadSprites(set: SpriteSet): SpriteBuffers | null {
    if (set.count === 0) return null;
    const { gl } = this;
    const vao = gl.createVertexArray()!;
    gl.bindVertexArray(vao);

    gl.bindBuffer(gl.ARRAY_BUFFER, this.cornerBuffer);
    const cornerLoc = gl.getAttribLocation(this.spriteProgram, "a_corner");
    gl.enableVertexAttribArray(cornerLoc);
    gl.vertexAttribPointer(cornerLoc, 2, gl.FLOAT, false, 0, 0);

    const instance = (
      name: string,
      data: Float32Array | Uint8Array | Uint16Array | Uint32Array,
      size: number,
      type: number,
      normalized = false,
    ) => {
      const buffer = gl.createBuffer()!;
      gl.bindBuffer(gl.ARRAY_BUFFER, buffer);
      gl.bufferData(gl.ARRAY_BUFFER, data, gl.STATIC_DRAW);
      const loc = gl.getAttribLocation(this.spriteProgram, name);
      gl.enableVertexAttribArray(loc);
      gl.vertexAttribPointer(loc, size, type, normalized, 0, 0);
      gl.vertexAttribDivisor(loc, 1);
    };
    instance("a_center", set.centers, 2, gl.FLOAT);
    instance("a_size", set.sizesPx, 1, gl.FLOAT);
    instance("a_rot", set.rotationsRad, 1, gl.FLOAT);
    instance("a_color", set.colors, 4, gl.UNSIGNED_BYTE, true);
    instance("a_icon", new Float32Array(set.icons), 1, gl.FLOAT);
    gl.bindVertexArray(null);
    return { vao, count: set.count };
  }

  render(view: View, layers: LayerFlags): void {
    const { gl } = this;
    gl.viewport(0, 0, gl.canvas.width, gl.canvas.height);
    gl.clearColor(0, 0, 0, 0);
    gl.clear(gl.COLOR_BUFFER_BIT);

    const [cx, cy] = project(view.lat, view.lon);
    const scale = worldScale(view.zoom);

    if (layers.edges && this.edgeVao && this.edgeIndexCount > 0) {
      gl.useProgram(this.edgeProgram);
      gl.uniform2f(gl.getUniformLocation(this.edgeProgram, "u_center"), cx, cy);
      gl.uniform1f(gl.getUniformLocation(this.edgeProgram, "u_scale"), scale);
      gl.uniform2f(
        gl.getUniformLocation(this.edgeProgram, "u_viewport"),
        view.widthPx,
        view.heightPx,
      );
      gl.bindVertexArray(this.edgeVao);
      gl.drawElements(gl.TRIANGLES, this.edgeIndexCount, gl.UNSIGNED_INT, 0);
      gl.bindVertexArray(null);
    }

    gl.useProgram(this.spriteProgram);
    gl.uniform2f(gl.getUniformLocation(this.spriteProgram, "u_center"), cx, cy);
    gl.uniform1f(gl.getUniformLocation(this.spriteProgram, "u_scale"), scale);
    gl.uniform2f(
      gl.getUniformLocation(this.spriteProgram, "u_viewport"),
      view.widthPx,
      view.heightPx,
    );
    const drawSprites = (set: SpriteBuffers | null, enabled: boolean) => {
      if (!enabled || !set) return;
      gl.bindVertexArray(set.vao);
      gl.drawArraysInstanced(gl.TRIANGLE_STRIP, 0, 4, set.count);
      gl.bindVertexArray(null);
    };
    drawSprites(this.arrows, layers.edges && layers.arrows);
    drawSprites(this.nodes, layers.nodes);
    drawSprites(this.markers, layers.markers);
  }
}

/** Decoder for the binary render bundle.
 *
 * Layout (little-endian): magic "SYRB", format u16, reserved u16,
 * bundle version u64, reference zoom f64, then u32 counts for edge vertices,
 * edge indices, node/arrow/marker instances and the icon table byte length;
 * sections follow in that order, the icon table as u16-length-prefixed UTF-8.
 * Sections are packed without padding, so every typed array is built from a
 * sliced copy rather than an aligned view.
 */

export const BUNDLE_FORMAT_VERSION = 1;
const MAGIC = 0x53595242; // "SYRB" big-endian read of the 4 magic bytes
export const HEADER_BYTES = 48;

export interface SpriteSet {
  count: number;
  centers: Float32Array; // x,y pairs, normalized world coordinates
  sizesPx: Float32Array;
  rotationsRad: Float32Array;
  colors: Uint8Array; // rgba per instance
  icons: Uint16Array;
  elementIndex: Uint32Array;
}

export interface RenderBundle {
  version: number;
  referenceZoom: number;
  edgePositions: Float32Array; // x,y pairs
  edgeColors: Uint8Array; // rgba per vertex
  edgeElementIndex: Uint32Array;
  edgeIndices: Uint32Array;
  nodes: SpriteSet;
  arrows: SpriteSet;
  markers: SpriteSet;
  iconTable: string[];
}

class Cursor {
  offset = 0;
  constructor(private buffer: ArrayBuffer) {}

  take(bytes: number, section: string): ArrayBuffer {
    if (this.offset + bytes > this.buffer.byteLength) {
      throw new Error(
        `truncated bundle: section ${section} needs ${bytes} bytes at ${this.offset}`,
      );
    }
    const slice = this.buffer.slice(this.offset, this.offset + bytes);
    this.offset += bytes;
    return slice;
  }

  f32(count: number, section: string): Float32Array {
    return new Float32Array(this.take(4 * count, section));
  }
  u32(count: number, section: string): Uint32Array {
    return new Uint32Array(this.take(4 * count, section));
  }
  u16(count: number, section: string): Uint16Array {
    return new Uint16Array(this.take(2 * count, section));
  }
  u8(count: number, section: string): Uint8Array {
    return new Uint8Array(this.take(count, section));
  }
}

function readSprites(cursor: Cursor, count: number, section: string): SpriteSet {
  return {
    count,
    centers: cursor.f32(2 * count, `${section}.centers`),
    sizesPx: cursor.f32(count, `${section}.sizes`),
    rotationsRad: cursor.f32(count, `${section}.rotations`),
    colors: cursor.u8(4 * count, `${section}.colors`),
    icons: cursor.u16(count, `${section}.icons`),
    elementIndex: cursor.u32(count, `${section}.elementIndex`),
  };
}

export function decodeBundle(buffer: ArrayBuffer): RenderBundle {
  if (buffer.byteLength < HEADER_BYTES) {
    throw new Error(`truncated bundle: header needs ${HEADER_BYTES} bytes`);
  }
  const header = new DataView(buffer, 0, HEADER_BYTES);
  if (header.getUint32(0, false) !== MAGIC) {
    throw new Error("bad bundle magic");
  }
  const format = header.getUint16(4, true);
  if (format !== BUNDLE_FORMAT_VERSION) {
    throw new Error(`unsupported bundle format version ${format}`);
  }
  const version = Number(header.getBigUint64(8, true));
  const referenceZoom = header.getFloat64(16, true);
  const nVertices = header.getUint32(24, true);
  const nIndices = header.getUint32(28, true);
  const nNodes = header.getUint32(32, true);
  const nArrows = header.getUint32(36, true);
  const nMarkers = header.getUint32(40, true);
  const iconBytes = header.getUint32(44, true);

  const cursor = new Cursor(buffer);
  cursor.offset = HEADER_BYTES;
  const bundle: RenderBundle = {
    version,
    referenceZoom,
    edgePositions: cursor.f32(2 * nVertices, "edge.positions"),
    edgeColors: cursor.u8(4 * nVertices, "edge.colors"),
    edgeElementIndex: cursor.u32(nVertices, "edge.elementIndex"),
    edgeIndices: cursor.u32(nIndices, "edge.indices"),
    nodes: readSprites(cursor, nNodes, "nodes"),
    arrows: readSprites(cursor, nArrows, "arrows"),
    markers: readSprites(cursor, nMarkers, "markers"),
    iconTable: [],
  };

  const iconBlob = new DataView(cursor.take(iconBytes, "iconTable"));
  const utf8 = new TextDecoder();
  let pos = 0;
  while (pos < iconBlob.byteLength) {
    if (pos + 2 > iconBlob.byteLength) throw new Error("truncated icon table");
    const length = iconBlob.getUint16(pos, true);
    pos += 2;
    if (pos + length > iconBlob.byteLength) throw new Error("truncated icon table");
    bundle.iconTable.push(
      utf8.decode(new Uint8Array(iconBlob.buffer, iconBlob.byteOffset + pos, length)),
    );
    pos += length;
  }
  if (cursor.offset !== buffer.byteLength) {
    throw new Error("trailing bytes after bundle");
  }
  return bundle;
}

/// <reference types="vitest/config" />
import { defineConfig } from 'vite';

const service = process.env.DETOURKIT_SERVICE ?? 'http://127.0.0.1:8000';

export default defineConfig({
  server: {
    proxy: {
      '/status': service,
      '/query': service,
      '/compare': service,
      '/validate': service,
      '/network': service,
    },
  },
  test: {
    environment: 'happy-dom',
  },
});
